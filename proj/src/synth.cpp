#include "ieval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "ieval/errors.hpp"
#include "ieval/pitch.hpp"
#include "ieval/wav.hpp"

namespace ieval {

std::string_view to_string(SynthMode mode) {
  switch (mode) {
    case SynthMode::Consistent: return "consistent";
    case SynthMode::Inconsistent: return "inconsistent";
    case SynthMode::Detuned: return "detuned";
  }
  return "consistent";
}

SynthMode parse_synth_mode(std::string_view text) {
  if (text == "consistent") return SynthMode::Consistent;
  if (text == "inconsistent") return SynthMode::Inconsistent;
  if (text == "detuned") return SynthMode::Detuned;
  throw Error(ErrorCode::InvalidConfig, "unknown synth mode '" + std::string(text) + "'");
}

void SynthProfile::validate() const {
  if (!envelope.empty()) {
    if (n_harmonics != 0 && envelope.size() != n_harmonics) {
      throw Error(ErrorCode::InvalidConfig, "envelope length must equal n_harmonics");
    }
    bool any = false;
    for (double a : envelope) {
      if (!(a >= 0.0)) throw Error(ErrorCode::InvalidConfig, "envelope amplitudes must be >= 0");
      any = any || a > 0.0;
    }
    if (!any) throw Error(ErrorCode::InvalidConfig, "envelope is all zero");
  }
  if (!(decay_s > 0.0) || !(duration_s > 0.0) || sample_rate <= 0) {
    throw Error(ErrorCode::InvalidConfig, "decay, duration and rate must be positive");
  }
  if (pitch_set.empty() || velocity_set.empty()) {
    throw Error(ErrorCode::InvalidConfig, "pitch and velocity sets must be non-empty");
  }
  for (int v : velocity_set) {
    if (v < 1 || v > 127) throw Error(ErrorCode::InvalidConfig, "velocity must lie in 1..127");
  }
  if (!drop_aliased && n_harmonics != 0) {
    int top = pitch_set.front();
    for (int p : pitch_set) top = std::max(top, p);
    const double shift = mode == SynthMode::Detuned ? detune_semitones : 0.0;
    const double highest = midi_to_hz(top + shift) * static_cast<double>(n_harmonics);
    if (highest >= sample_rate / 2.0) {
      throw Error(ErrorCode::AliasedHarmonics,
                  "harmonic " + std::to_string(n_harmonics) + " of MIDI " + std::to_string(top) +
                      " reaches Nyquist");
    }
  }
}

std::vector<float> render_tone(double f0, std::span<const double> amplitudes, double gain,
                               double decay_s, double duration_s, int sample_rate) {
  const auto length = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  const double nyquist = sample_rate / 2.0;
  double total = 0.0;
  for (double a : amplitudes) total += a;
  std::vector<float> out(length, 0.0f);
  if (total <= 0.0) return out;

  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> acc(length, 0.0);
  for (std::size_t h = 0; h < amplitudes.size(); ++h) {
    const double freq = f0 * static_cast<double>(h + 1);
    if (freq >= nyquist || amplitudes[h] == 0.0) continue;
    const double amp = amplitudes[h] / total;
    const double step = two_pi * freq / sample_rate;
    // Phasor recurrence, re-anchored to an exact sin/cos every block.
    const double rc = std::cos(step);
    const double rs = std::sin(step);
    constexpr std::size_t kBlock = 1024;
    for (std::size_t start = 0; start < length; start += kBlock) {
      const double phase = step * static_cast<double>(start);
      double re = std::cos(phase);
      double im = std::sin(phase);
      const std::size_t end = std::min(length, start + kBlock);
      for (std::size_t n = start; n < end; ++n) {
        acc[n] += amp * im;
        const double next_re = re * rc - im * rs;
        im = re * rs + im * rc;
        re = next_re;
      }
    }
  }
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    out[n] = static_cast<float>(acc[n] * std::exp(-t / decay_s) * gain);
  }
  return out;
}

double SpectralEnvelope::level_db(double hz) const {
  // Octaves above A0; ripples repeat every 7/k octaves, about the audible span.
  const double oct = std::log2(hz / 27.5);
  double db = tilt_db_per_octave * oct;
  for (std::size_t k = 0; k < ripple_db.size(); ++k) {
    db += ripple_db[k] *
          std::cos(2.0 * std::numbers::pi * static_cast<double>(k + 1) * oct / 7.0 + ripple_phase[k]);
  }
  return db;
}

SpectralEnvelope random_spectral_envelope(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpectralEnvelope env;
  env.tilt_db_per_octave = -3.0 - 9.0 * unit(rng);
  for (std::size_t k = 0; k < env.ripple_db.size(); ++k) {
    env.ripple_db[k] = 8.0 * unit(rng);
    env.ripple_phase[k] = 2.0 * std::numbers::pi * unit(rng);
  }
  return env;
}

std::vector<double> harmonic_amplitudes(const SpectralEnvelope& env, double f0, int sample_rate,
                                        std::size_t n_harmonics) {
  if (n_harmonics == 0) {
    n_harmonics = static_cast<std::size_t>(std::max(1.0, std::ceil(sample_rate / (2.0 * f0)) - 1.0));
  }
  std::vector<double> amps(n_harmonics);
  for (std::size_t h = 0; h < n_harmonics; ++h) {
    amps[h] = std::pow(10.0, env.level_db(f0 * static_cast<double>(h + 1)) / 20.0);
  }
  return amps;
}

Instrument synth_instrument(const SynthProfile& profile) {
  profile.validate();
  struct Job {
    int pitch;
    int velocity;
  };
  std::vector<Job> jobs;
  for (int p : profile.pitch_set)
    for (int v : profile.velocity_set) jobs.push_back({p, v});

  const double shift = profile.mode == SynthMode::Detuned ? profile.detune_semitones : 0.0;
  const SpectralEnvelope shared = random_spectral_envelope(profile.seed);

  std::vector<std::vector<double>> amps(jobs.size());
  std::vector<double> in_band(jobs.size(), 0.0);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const double f0 = midi_to_hz(job.pitch + shift);
    if (profile.mode == SynthMode::Inconsistent) {
      // Independent stream per (seed, pitch, velocity).
      std::seed_seq seq{profile.seed, static_cast<std::uint64_t>(job.pitch),
                        static_cast<std::uint64_t>(job.velocity)};
      std::uint32_t words[2];
      seq.generate(std::begin(words), std::end(words));
      const auto own = random_spectral_envelope((static_cast<std::uint64_t>(words[0]) << 32) | words[1]);
      amps[i] = harmonic_amplitudes(own, f0, profile.sample_rate, profile.n_harmonics);
    } else if (profile.envelope.empty()) {
      amps[i] = harmonic_amplitudes(shared, f0, profile.sample_rate, profile.n_harmonics);
    } else {
      amps[i] = profile.envelope;
    }
    for (std::size_t h = 0; h < amps[i].size(); ++h) {
      if (f0 * static_cast<double>(h + 1) < profile.sample_rate / 2.0) in_band[i] += amps[i][h];
    }
  }
  // Source-filter levels: harmonic h sounds at envelope(h f0) * velocity/127,
  // with one scale for the whole instrument so its loudest note peaks at
  // most at velocity/127.
  const double loudest = *std::max_element(in_band.begin(), in_band.end());
  if (!(loudest > 0.0)) throw Error(ErrorCode::InvalidConfig, "no harmonic lies below Nyquist");

  std::vector<Sample> samples(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(jobs.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Job& job = jobs[k];
    double total = 0.0;
    for (double a : amps[k]) total += a;
    const double gain = job.velocity / 127.0 * total / loudest;

    Sample& s = samples[k];
    s.meta.family = profile.family;
    s.meta.source = SourceType::Synthetic;
    s.meta.instrument_id = profile.instrument_id;
    s.meta.pitch = job.pitch;
    s.meta.velocity = job.velocity;
    s.sample_rate = profile.sample_rate;
    s.samples = render_tone(midi_to_hz(job.pitch + shift), amps[k], gain, profile.decay_s,
                            profile.duration_s, profile.sample_rate);
  }
  return Instrument("synth-" + std::string(to_string(profile.mode)), std::move(samples));
}

void write_instrument(const Instrument& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  for (const auto& s : inst.samples()) {
    const std::string file = format_nsynth_name(s.meta) + ".wav";
    write_wav(dir / file, s.samples, s.sample_rate, WavEncoding::Float32);
    nlohmann::ordered_json entry;
    entry["file"] = file;
    entry["family"] = s.meta.family;
    entry["source"] = to_string(s.meta.source);
    entry["instrument_id"] = s.meta.instrument_id;
    entry["pitch"] = s.meta.pitch;
    entry["velocity"] = s.meta.velocity;
    manifest.push_back(std::move(entry));
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest", (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
}

}  // namespace ieval
