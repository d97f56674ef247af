#include "ieval/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>

#include <nlohmann/json.hpp>

#include "ieval/errors.hpp"
#include "ieval/wav.hpp"

namespace ieval {
namespace {

SourceType parse_source(std::string_view s) {
  if (s == "acoustic") return SourceType::Acoustic;
  if (s == "electronic") return SourceType::Electronic;
  if (s == "synthetic") return SourceType::Synthetic;
  throw Error(ErrorCode::MalformedName, "unknown source type '" + std::string(s) + "'");
}

void check_grid(const SampleMeta& meta, const std::string& context) {
  if (!is_grid_pitch(meta.pitch)) {
    throw Error(ErrorCode::OutOfRange,
                "pitch " + std::to_string(meta.pitch) + " outside MIDI 21-108", context);
  }
  if (!is_grid_velocity(meta.velocity)) {
    throw Error(ErrorCode::OutOfRange,
                "velocity " + std::to_string(meta.velocity) + " not in {25,50,75,100,127}",
                context);
  }
}

std::string key_context(const SampleKey& key) { return key.label(); }

}  // namespace

std::string_view to_string(SourceType source) {
  switch (source) {
    case SourceType::Acoustic: return "acoustic";
    case SourceType::Electronic: return "electronic";
    case SourceType::Synthetic: return "synthetic";
  }
  return "acoustic";
}

std::string SampleKey::label() const {
  return "p" + std::to_string(pitch) + "_v" + std::to_string(velocity);
}

bool is_grid_pitch(int pitch) { return pitch >= kMinGridPitch && pitch <= kMaxGridPitch; }

bool is_grid_velocity(int velocity) {
  return std::find(std::begin(kGridVelocities), std::end(kGridVelocities), velocity) !=
         std::end(kGridVelocities);
}

SampleMeta parse_nsynth_name(std::string_view filename, bool validate_grid) {
  static const std::regex kGrammar(
      R"(^([a-z_]+)_(acoustic|electronic|synthetic)_(\d{3})-(\d{3})-(\d{3})$)");

  std::string stem(filename);
  if (stem.size() > 4 && stem.ends_with(".wav")) stem.resize(stem.size() - 4);

  std::smatch m;
  if (!std::regex_match(stem, m, kGrammar)) {
    throw Error(ErrorCode::MalformedName,
                "expected <family>_<source>_<iii>-<ppp>-<vvv>", std::string(filename));
  }
  SampleMeta meta;
  meta.family = m[1].str();
  meta.source = parse_source(m[2].str());
  meta.instrument_id = std::stoi(m[3].str());
  meta.pitch = std::stoi(m[4].str());
  meta.velocity = std::stoi(m[5].str());
  if (validate_grid) check_grid(meta, std::string(filename));
  return meta;
}

std::string format_nsynth_name(const SampleMeta& meta) {
  char numbers[32];
  std::snprintf(numbers, sizeof numbers, "%03d-%03d-%03d", meta.instrument_id, meta.pitch,
                meta.velocity);
  return meta.family + "_" + std::string(to_string(meta.source)) + "_" + numbers;
}

Instrument::Instrument(std::string name, std::vector<Sample> samples)
    : name_(std::move(name)), samples_(std::move(samples)) {
  if (samples_.empty()) throw Error(ErrorCode::EmptyInstrument, "instrument has no samples", name_);

  std::stable_sort(samples_.begin(), samples_.end(),
                   [](const Sample& a, const Sample& b) { return a.key() < b.key(); });

  sample_rate_ = samples_.front().sample_rate;
  length_ = samples_.front().samples.size();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    const std::string ctx = key_context(s.key());
    if (i > 0 && samples_[i - 1].key() == s.key()) {
      throw Error(ErrorCode::DuplicateKey, "duplicate (pitch, velocity)", ctx);
    }
    if (s.sample_rate <= 0) throw Error(ErrorCode::InvalidConfig, "non-positive sample rate", ctx);
    if (s.sample_rate != sample_rate_) {
      throw Error(ErrorCode::RateMismatch,
                  std::to_string(s.sample_rate) + " Hz vs " + std::to_string(sample_rate_) + " Hz",
                  ctx);
    }
    if (s.samples.empty()) throw Error(ErrorCode::TooShort, "empty waveform", ctx);
    if (s.samples.size() != length_) {
      throw Error(ErrorCode::InvalidConfig, "sample lengths differ", ctx);
    }
    for (float v : s.samples) {
      if (!std::isfinite(v)) throw Error(ErrorCode::CorruptFile, "non-finite amplitude", ctx);
      if (v < -1.0f || v > 1.0f) throw Error(ErrorCode::OutOfRange, "amplitude outside [-1, 1]", ctx);
    }
  }
}

Instrument Instrument::assemble(std::string name, std::vector<Sample> samples, LengthPolicy policy) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInstrument, "instrument has no samples", name);
  std::size_t target = 0;
  switch (policy.kind) {
    case LengthPolicy::Kind::PadToMax:
      for (const auto& s : samples) target = std::max(target, s.samples.size());
      break;
    case LengthPolicy::Kind::TruncateToMin:
      target = samples.front().samples.size();
      for (const auto& s : samples) target = std::min(target, s.samples.size());
      break;
    case LengthPolicy::Kind::Fixed:
      target = policy.fixed_length;
      break;
  }
  if (target == 0) throw Error(ErrorCode::TooShort, "length policy yields empty samples", name);
  for (auto& s : samples) s.samples.resize(target, 0.0f);
  return Instrument(std::move(name), std::move(samples));
}

Sample load_sample(const std::filesystem::path& file, const LoadOptions& options) {
  Sample s;
  s.meta = parse_nsynth_name(file.filename().string(), options.validate_grid);
  Waveform w = load_wav(file, options.downmix);
  s.samples = std::move(w.samples);
  s.sample_rate = w.sample_rate;
  return s;
}

Instrument load_instrument(const std::filesystem::path& dir, const LoadOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory", dir.string());

  std::map<std::string, SampleMeta> manifest;
  const fs::path manifest_path = dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
      for (const auto& entry : doc) {
        SampleMeta meta;
        meta.family = entry.at("family").get<std::string>();
        meta.source = parse_source(entry.at("source").get<std::string>());
        meta.instrument_id = entry.at("instrument_id").get<int>();
        meta.pitch = entry.at("pitch").get<int>();
        meta.velocity = entry.at("velocity").get<int>();
        manifest[entry.at("file").get<std::string>()] = meta;
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptFile, std::string("bad manifest: ") + e.what(),
                  manifest_path.string());
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), manifest_path.string());
    }
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& [name, meta] : manifest) {
    if (!fs::exists(dir / name)) throw Error(ErrorCode::IoError, "manifest entry missing on disk", name);
  }

  std::vector<Sample> samples;
  samples.reserve(files.size());
  for (const auto& file : files) {
    Sample s;
    const std::string fname = file.filename().string();
    if (auto it = manifest.find(fname); it != manifest.end()) {
      s.meta = it->second;
      if (options.validate_grid) check_grid(s.meta, fname);
    } else {
      s.meta = parse_nsynth_name(fname, options.validate_grid);
    }
    Waveform w = load_wav(file, options.downmix);
    s.samples = std::move(w.samples);
    s.sample_rate = w.sample_rate;
    samples.push_back(std::move(s));
  }
  if (samples.size() < 2) {
    throw Error(ErrorCode::EmptyInstrument,
                "need at least 2 samples, found " + std::to_string(samples.size()), dir.string());
  }
  return Instrument::assemble(dir.filename().string(), std::move(samples), options.policy);
}

}  // namespace ieval
