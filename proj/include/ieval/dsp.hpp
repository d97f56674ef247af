#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ieval/fft.hpp"
#include "ieval/matrix.hpp"

namespace ieval {

enum class WindowKind { Hann };

// One analysis scale of the liftered log-mel feature.
struct ScaleConfig {
  std::size_t fft_size = 2048;
  std::size_t hop_size = 512;
  WindowKind window = WindowKind::Hann;
  std::size_t mel_bands = 80;
  std::size_t lifter_order = 13;
  double power = 1.0;
  double log_floor = 1e-5;

  // Throws InvalidConfig when an invariant is violated.
  void validate() const;
};

// Number of whole frames with no padding: floor((L - n) / hop) + 1, or 0
// when the signal is shorter than one frame.
std::size_t frame_count(std::size_t length, const ScaleConfig& cfg);

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// |DFT(window * frame)| for the non-negative bins, one column per frame.
// Result is (fft_size/2 + 1) x T. Throws TooShort.
Matrix stft_magnitude(std::span<const float> x, const ScaleConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filters (HTK mel scale, peak 1), centers equally spaced in
// mel between 0 Hz and Nyquist. Each filter k spans centers k-1 .. k+1.
class MelFilterbank {
 public:
  MelFilterbank(const ScaleConfig& cfg, int sample_rate);

  const Matrix& matrix() const noexcept { return weights_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t bands() const noexcept { return weights_.rows(); }
  std::size_t bins() const noexcept { return weights_.cols(); }

  double center_hz(std::size_t band) const { return edges_hz_[band + 1]; }
  // Continuous triangle response of `band` at `hz`.
  double response(std::size_t band, double hz) const;

  // out[k] = sum_b W(k, b) * spectrum[b], visiting only nonzero bins.
  void apply(std::span<const double> spectrum, std::span<double> out) const;

 private:
  Matrix weights_;
  std::vector<double> edges_hz_;
  std::vector<std::size_t> first_bin_;
  std::vector<std::size_t> last_bin_;  // exclusive
  int sample_rate_;
};

MelFilterbank build_mel_filterbank(const ScaleConfig& cfg, int sample_rate);

// Orthonormal DCT-II basis with its masked and inverse forms. The lifter
// projection is D_inv * D_masked.
class LifterBasis {
 public:
  // Keeps coefficients [0, m) or, with `exclude_dc`, [1, m] (clamped to M-1).
  LifterBasis(std::size_t bands, std::size_t lifter_order, bool exclude_dc = false);

  const Matrix& dct() const noexcept { return dct_; }
  const Matrix& masked() const noexcept { return masked_; }
  const Matrix& inverse() const noexcept { return inverse_; }
  Matrix projection() const { return multiply(inverse_, masked_); }

  std::size_t bands() const noexcept { return dct_.rows(); }
  std::size_t first_kept() const noexcept { return first_; }
  std::size_t end_kept() const noexcept { return end_; }

  // out = D_inv * D_masked * in, evaluated through the retained rows only.
  // `scratch` must hold at least bands() values.
  void apply(std::span<const double> in, std::span<double> out, std::span<double> scratch) const;

 private:
  Matrix dct_;
  Matrix masked_;
  Matrix inverse_;
  std::size_t first_;
  std::size_t end_;
};

LifterBasis build_lifter(const ScaleConfig& cfg, bool exclude_dc = false);

// y: mel_bands x T.
struct LifteredFeature {
  Matrix y;
  std::size_t scale_index = 0;
};

// Reusable per-scale analysis state (window, FFT plan, filterbank, lifter).
class FeatureExtractor {
 public:
  FeatureExtractor(const ScaleConfig& cfg, int sample_rate, bool exclude_dc = false);

  const ScaleConfig& config() const noexcept { return cfg_; }
  const MelFilterbank& filterbank() const noexcept { return fb_; }
  const LifterBasis& lifter() const noexcept { return lb_; }

  // y = D_inv D_masked log(B |STFT(x)|^p + eps), columnwise. Throws TooShort.
  LifteredFeature compute(std::span<const float> x, std::size_t scale_index = 0) const;

 private:
  ScaleConfig cfg_;
  std::vector<double> window_;
  RealFft fft_;
  MelFilterbank fb_;
  LifterBasis lb_;
};

LifteredFeature liftered_logmel(std::span<const float> x, const ScaleConfig& cfg,
                                const MelFilterbank& fb, const LifterBasis& lb);

}  // namespace ieval
