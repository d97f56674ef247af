#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ieval {

enum class SourceType { Acoustic, Electronic, Synthetic };

std::string_view to_string(SourceType source);

inline constexpr int kMinGridPitch = 21;
inline constexpr int kMaxGridPitch = 108;
inline constexpr int kGridVelocities[] = {25, 50, 75, 100, 127};

// (pitch, velocity) identity of a sample within an instrument. Ordering is
// lexicographic and defines the canonical sample order everywhere.
struct SampleKey {
  int pitch = 0;
  int velocity = 0;

  auto operator<=>(const SampleKey&) const = default;

  // "p<pitch>_v<velocity>"
  std::string label() const;
};

struct SampleMeta {
  std::string family;
  SourceType source = SourceType::Acoustic;
  int instrument_id = 0;
  int pitch = 0;
  int velocity = 0;

  SampleKey key() const { return {pitch, velocity}; }
  bool operator==(const SampleMeta&) const = default;
};

bool is_grid_pitch(int pitch);
bool is_grid_velocity(int velocity);

// Parses `<family>_<source>_<iii>-<ppp>-<vvv>` with an optional ".wav"
// suffix. Throws MalformedName, or OutOfRange when `validate_grid` is set and
// the pitch/velocity fall off the 88-key x 5-velocity grid.
SampleMeta parse_nsynth_name(std::string_view filename, bool validate_grid = false);

// Inverse of parse_nsynth_name (stem only, no extension).
std::string format_nsynth_name(const SampleMeta& meta);

struct Sample {
  SampleMeta meta;
  std::vector<float> samples;
  int sample_rate = 0;

  SampleKey key() const { return meta.key(); }
};

struct LengthPolicy {
  enum class Kind { PadToMax, TruncateToMin, Fixed };
  Kind kind = Kind::PadToMax;
  std::size_t fixed_length = 0;  // samples, Kind::Fixed only

  static LengthPolicy pad_to_max() { return {Kind::PadToMax, 0}; }
  static LengthPolicy truncate_to_min() { return {Kind::TruncateToMin, 0}; }
  static LengthPolicy fixed(std::size_t length) { return {Kind::Fixed, length}; }
};

// Immutable ensemble of equal-length, equal-rate samples sorted by key.
class Instrument {
 public:
  // Validates every invariant; samples must already share one length.
  Instrument(std::string name, std::vector<Sample> samples);

  // Conforms lengths per `policy` (zero padding at the tail or truncation),
  // then constructs.
  static Instrument assemble(std::string name, std::vector<Sample> samples, LengthPolicy policy);

  const std::string& name() const noexcept { return name_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const std::vector<Sample>& samples() const noexcept { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::string name_;
  std::vector<Sample> samples_;
  int sample_rate_ = 0;
  std::size_t length_ = 0;
};

struct LoadOptions {
  LengthPolicy policy = LengthPolicy::pad_to_max();
  bool validate_grid = false;
  bool downmix = true;
};

// Loads every *.wav in `dir`. A `manifest.json` sidecar, when present,
// supplies metadata for the files it lists; other files are named by the
// NSynth convention. Requires at least two samples.
Instrument load_instrument(const std::filesystem::path& dir, const LoadOptions& options = {});

// Loads one file as a single-sample set (metadata from its name).
Sample load_sample(const std::filesystem::path& file, const LoadOptions& options = {});

}  // namespace ieval
