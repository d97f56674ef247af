#include "ieval/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ieval/errors.hpp"

namespace ieval {

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void ScaleConfig::validate() const {
  if (!is_power_of_two(fft_size) || fft_size < 4) {
    throw Error(ErrorCode::InvalidConfig, "fft_size must be a power of two >= 4");
  }
  if (hop_size == 0 || hop_size > fft_size) {
    throw Error(ErrorCode::InvalidConfig, "hop_size must satisfy 0 < hop <= fft_size");
  }
  if (mel_bands == 0 || lifter_order == 0 || lifter_order > mel_bands) {
    throw Error(ErrorCode::InvalidConfig, "lifter order must satisfy 1 <= m <= mel bands");
  }
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw Error(ErrorCode::InvalidConfig, "power must be positive");
  }
  if (!(log_floor > 0.0) || !std::isfinite(log_floor)) {
    throw Error(ErrorCode::InvalidConfig, "log floor must be positive");
  }
}

std::size_t frame_count(std::size_t length, const ScaleConfig& cfg) {
  if (length < cfg.fft_size) return 0;
  return (length - cfg.fft_size) / cfg.hop_size + 1;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

namespace {

void require_frames(std::size_t length, const ScaleConfig& cfg) {
  if (length < cfg.fft_size) {
    throw Error(ErrorCode::TooShort, "signal of " + std::to_string(length) +
                                         " samples is shorter than fft_size " +
                                         std::to_string(cfg.fft_size));
  }
}

// Fills `mag` with |DFT(window * x[start .. start+n))|^power.
void frame_spectrum(std::span<const float> x, std::size_t start, std::span<const double> window,
                    const RealFft& fft, RealFft::Workspace& ws, double power,
                    std::span<double> mag) {
  auto in = ws.input();
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = window[i] * static_cast<double>(x[start + i]);
  fft.forward(ws);
  const auto out = ws.output();
  if (power == 1.0) {
    for (std::size_t b = 0; b < out.size(); ++b) mag[b] = std::abs(out[b]);
  } else {
    for (std::size_t b = 0; b < out.size(); ++b) mag[b] = std::pow(std::abs(out[b]), power);
  }
}

LifteredFeature compute_feature(std::span<const float> x, const ScaleConfig& cfg,
                                std::span<const double> window, const RealFft& fft,
                                const MelFilterbank& fb, const LifterBasis& lb,
                                std::size_t scale_index) {
  require_frames(x.size(), cfg);
  const std::size_t frames = frame_count(x.size(), cfg);
  const std::size_t bands = fb.bands();

  LifteredFeature feat{Matrix(bands, frames), scale_index};
  RealFft::Workspace ws(fft);
  std::vector<double> mag(fft.bins());
  std::vector<double> logmel(bands);
  std::vector<double> lifted(bands);
  std::vector<double> scratch(bands);

  for (std::size_t t = 0; t < frames; ++t) {
    frame_spectrum(x, t * cfg.hop_size, window, fft, ws, cfg.power, mag);
    fb.apply(mag, logmel);
    for (double& v : logmel) v = std::log(v + cfg.log_floor);
    lb.apply(logmel, lifted, scratch);
    for (std::size_t k = 0; k < bands; ++k) feat.y(k, t) = lifted[k];
  }
  return feat;
}

}  // namespace

Matrix stft_magnitude(std::span<const float> x, const ScaleConfig& cfg) {
  cfg.validate();
  require_frames(x.size(), cfg);
  const std::size_t frames = frame_count(x.size(), cfg);
  const RealFft fft(cfg.fft_size);
  RealFft::Workspace ws(fft);
  const auto window = hann_window(cfg.fft_size);
  Matrix out(fft.bins(), frames);
  std::vector<double> mag(fft.bins());
  for (std::size_t t = 0; t < frames; ++t) {
    frame_spectrum(x, t * cfg.hop_size, window, fft, ws, 1.0, mag);
    for (std::size_t b = 0; b < mag.size(); ++b) out(b, t) = mag[b];
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(const ScaleConfig& cfg, int sample_rate) : sample_rate_(sample_rate) {
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidConfig, "sample rate must be positive");
  cfg.validate();
  const std::size_t bands = cfg.mel_bands;
  const std::size_t bins = cfg.fft_size / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(cfg.fft_size);

  const double top = hz_to_mel(nyquist);
  edges_hz_.resize(bands + 2);
  for (std::size_t i = 0; i < bands + 2; ++i) {
    edges_hz_[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(bands + 1));
  }

  for (std::size_t k = 1; k < bands; ++k) {
    if (std::lround(edges_hz_[k] / bin_hz) == std::lround(edges_hz_[k + 1] / bin_hz)) {
      throw Error(ErrorCode::DegenerateBands,
                  "mel bands " + std::to_string(k - 1) + " and " + std::to_string(k) +
                      " share DFT bin; use fewer bands or a larger fft_size");
    }
  }

  weights_ = Matrix(bands, bins);
  first_bin_.assign(bands, bins);
  last_bin_.assign(bands, 0);
  for (std::size_t k = 0; k < bands; ++k) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double w = response(k, static_cast<double>(b) * bin_hz);
      if (w <= 0.0) continue;
      weights_(k, b) = w;
      first_bin_[k] = std::min(first_bin_[k], b);
      last_bin_[k] = b + 1;
    }
    if (last_bin_[k] == 0) {
      throw Error(ErrorCode::DegenerateBands,
                  "mel band " + std::to_string(k) + " covers no DFT bin");
    }
  }
}

double MelFilterbank::response(std::size_t band, double hz) const {
  const double lo = edges_hz_[band];
  const double c = edges_hz_[band + 1];
  const double hi = edges_hz_[band + 2];
  if (hz <= lo || hz >= hi) return 0.0;
  if (hz <= c) return (hz - lo) / (c - lo);
  return (hi - hz) / (hi - c);
}

void MelFilterbank::apply(std::span<const double> spectrum, std::span<double> out) const {
  for (std::size_t k = 0; k < weights_.rows(); ++k) {
    const auto w = weights_.row(k);
    double acc = 0.0;
    for (std::size_t b = first_bin_[k]; b < last_bin_[k]; ++b) acc += w[b] * spectrum[b];
    out[k] = acc;
  }
}

MelFilterbank build_mel_filterbank(const ScaleConfig& cfg, int sample_rate) {
  return MelFilterbank(cfg, sample_rate);
}

LifterBasis::LifterBasis(std::size_t bands, std::size_t lifter_order, bool exclude_dc) {
  if (bands == 0 || lifter_order == 0 || lifter_order > bands) {
    throw Error(ErrorCode::InvalidConfig, "lifter order must satisfy 1 <= m <= M");
  }
  const double n = static_cast<double>(bands);
  dct_ = Matrix(bands, bands);
  for (std::size_t k = 0; k < bands; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t i = 0; i < bands; ++i) {
      dct_(k, i) = scale * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                                    static_cast<double>(k) / n);
    }
  }
  if (exclude_dc) {
    first_ = 1;
    end_ = std::min(lifter_order + 1, bands);
  } else {
    first_ = 0;
    end_ = lifter_order;
  }
  masked_ = Matrix(bands, bands);
  for (std::size_t k = first_; k < end_; ++k) {
    for (std::size_t i = 0; i < bands; ++i) masked_(k, i) = dct_(k, i);
  }
  inverse_ = transpose(dct_);
}

void LifterBasis::apply(std::span<const double> in, std::span<double> out,
                        std::span<double> scratch) const {
  const std::size_t m = bands();
  for (std::size_t k = first_; k < end_; ++k) {
    const auto row = dct_.row(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += row[i] * in[i];
    scratch[k] = acc;
  }
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
  for (std::size_t k = first_; k < end_; ++k) {
    const auto row = dct_.row(k);
    const double c = scratch[k];
    for (std::size_t i = 0; i < m; ++i) out[i] += row[i] * c;
  }
}

LifterBasis build_lifter(const ScaleConfig& cfg, bool exclude_dc) {
  return LifterBasis(cfg.mel_bands, cfg.lifter_order, exclude_dc);
}

FeatureExtractor::FeatureExtractor(const ScaleConfig& cfg, int sample_rate, bool exclude_dc)
    : cfg_(cfg),
      window_((cfg.validate(), hann_window(cfg.fft_size))),
      fft_(cfg.fft_size),
      fb_(cfg, sample_rate),
      lb_(cfg.mel_bands, cfg.lifter_order, exclude_dc) {}

LifteredFeature FeatureExtractor::compute(std::span<const float> x, std::size_t scale_index) const {
  return compute_feature(x, cfg_, window_, fft_, fb_, lb_, scale_index);
}

LifteredFeature liftered_logmel(std::span<const float> x, const ScaleConfig& cfg,
                                const MelFilterbank& fb, const LifterBasis& lb) {
  cfg.validate();
  if (fb.bands() != cfg.mel_bands || lb.bands() != cfg.mel_bands ||
      fb.bins() != cfg.fft_size / 2 + 1) {
    throw Error(ErrorCode::InvalidConfig, "filterbank/lifter shape does not match config");
  }
  const RealFft fft(cfg.fft_size);
  const auto window = hann_window(cfg.fft_size);
  return compute_feature(x, cfg, window, fft, fb, lb, 0);
}

}  // namespace ieval
