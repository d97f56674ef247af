#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ieval/instrument.hpp"
#include "ieval/kernels.hpp"

namespace ieval {

// Per-frame pitch; nullopt marks an unvoiced frame.
using F0 = std::optional<double>;

enum class DifferenceMethod { Fft, Direct };

struct YinConfig {
  std::size_t frame_size = 4096;
  std::size_t hop_size = 1024;
  double threshold = 0.10;
  double f_min = 25.0;
  double f_max = 4400.0;
  DifferenceMethod method = DifferenceMethod::Fft;
  // Low-pass at f_max before estimation. Partials far above the pitch range
  // make d' jagged at integer lags and can pull the dip off the period.
  bool prefilter = true;

  // Needs two periods of f_min per frame and f_min < f_max < rate/2.
  void validate(int sample_rate) const;
};

// YIN difference function d(tau) = sum_{j<W} (x_j - x_{j+tau})^2 for
// tau in [0, W], W = frame.size()/2.
std::vector<double> yin_difference(std::span<const double> frame, DifferenceMethod method);

// Cumulative-mean-normalized difference; d'(0) = 1 and d' = 1 wherever the
// running sum is zero.
std::vector<double> yin_cmnd(std::span<const double> diff);

std::vector<F0> yin_f0(std::span<const float> x, int sample_rate, const YinConfig& cfg = {});

// Median over voiced frames (mean of the middle two for even counts).
F0 median_pitch(std::span<const F0> frames);

double hz_to_midi(double hz);
double midi_to_hz(double midi);

enum class MadMode { MeanAbs, MedianAbs };

std::string_view to_string(MadMode mode);

struct PitchEntry {
  SampleKey key;
  std::optional<double> f0_hz;
  std::optional<double> midi_est;
  std::optional<double> deviation;  // semitones, estimate - target
};

struct PitchReport {
  std::vector<PitchEntry> per_sample;
  double mad = 0.0;
  MadMode mode = MadMode::MeanAbs;
  std::size_t voiced = 0;
  std::size_t unvoiced = 0;
};

// Median YIN pitch of one waveform against its integer MIDI target.
PitchEntry estimate_sample_pitch(const Sample& sample, const YinConfig& cfg);

// Aggregate absolute deviation (semitones) of each sample's median pitch
// from its metadata pitch; unvoiced samples are counted and excluded.
// Throws AllUnvoiced when no sample yields a pitch.
PitchReport mad_report(const Instrument& inst, const YinConfig& cfg = {},
                       MadMode mode = MadMode::MeanAbs, Backend backend = Backend::OpenMP);

nlohmann::ordered_json pitch_report_json(const PitchReport& report);

}  // namespace ieval
