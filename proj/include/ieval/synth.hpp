#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ieval/instrument.hpp"

namespace ieval {

enum class SynthMode { Consistent, Inconsistent, Detuned };

std::string_view to_string(SynthMode mode);
SynthMode parse_synth_mode(std::string_view text);

struct SynthProfile {
  SynthMode mode = SynthMode::Consistent;
  // 0: every harmonic below Nyquist for each note.
  std::size_t n_harmonics = 0;
  // Per-harmonic relative amplitudes. Empty: a random SpectralEnvelope drawn
  // from `seed` (one shared draw for consistent/detuned, one per sample for
  // inconsistent).
  std::vector<double> envelope;
  double decay_s = 1.0;
  double detune_semitones = 0.0;
  std::uint64_t seed = 0;
  double duration_s = 1.0;
  int sample_rate = 44100;
  std::vector<int> pitch_set{60};
  std::vector<int> velocity_set{100};
  bool drop_aliased = true;
  std::string family = "synthlead";
  int instrument_id = 0;

  void validate() const;
};

// Sum of harmonics of f0 with the given amplitudes, exponential decay with
// time constant `decay_s`, zero initial phase, scaled by `gain`. Amplitudes
// are normalized to unit sum so |output| <= gain. Harmonics at or above
// Nyquist are skipped.
std::vector<float> render_tone(double f0, std::span<const double> amplitudes, double gain,
                               double decay_s, double duration_s, int sample_rate);

// Smooth spectral envelope fixed in frequency, so notes of one instrument
// share formant positions the way a body resonance would.
struct SpectralEnvelope {
  double tilt_db_per_octave = -6.0;
  std::array<double, 3> ripple_db{};
  std::array<double, 3> ripple_phase{};

  double level_db(double hz) const;
};

// Tilt uniform in [-12, -3] dB/octave, three broad ripples of up to 8 dB.
SpectralEnvelope random_spectral_envelope(std::uint64_t seed);

// Envelope sampled at harmonics 1..n of f0 (n = 0: all below Nyquist).
std::vector<double> harmonic_amplitudes(const SpectralEnvelope& env, double f0, int sample_rate,
                                        std::size_t n_harmonics = 0);

// One sample per (pitch, velocity): equal-temperament f0 (shifted by the
// detune in Detuned mode), harmonics at their envelope level times
// velocity/127, one scale factor for the whole instrument so the loudest
// note peaks at no more than velocity/127. Deterministic in the profile.
Instrument synth_instrument(const SynthProfile& profile);

// Writes NSynth-named float WAVs plus manifest.json into `dir`.
void write_instrument(const Instrument& inst, const std::filesystem::path& dir);

}  // namespace ieval
