#include "ieval/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "ieval/errors.hpp"
#include "ieval/fft.hpp"

namespace ieval {

void YinConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidConfig, "sample rate must be positive");
  if (hop_size == 0) throw Error(ErrorCode::InvalidConfig, "YIN hop must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "YIN threshold must lie in (0, 1)");
  }
  if (!(f_min > 0.0 && f_min < f_max && f_max < sample_rate / 2.0)) {
    throw Error(ErrorCode::InvalidConfig, "YIN range must satisfy 0 < f_min < f_max < rate/2");
  }
  if (static_cast<double>(frame_size) < 2.0 * sample_rate / f_min) {
    throw Error(ErrorCode::InvalidConfig,
                "YIN frame of " + std::to_string(frame_size) +
                    " samples is shorter than two periods of f_min");
  }
}

std::vector<double> yin_difference(std::span<const double> frame, DifferenceMethod method) {
  const std::size_t w = frame.size() / 2;
  std::vector<double> d(w + 1, 0.0);

  if (method == DifferenceMethod::Direct) {
    for (std::size_t tau = 1; tau <= w; ++tau) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w; ++j) {
        const double diff = frame[j] - frame[j + tau];
        acc += diff * diff;
      }
      d[tau] = acc;
    }
    return d;
  }

  // d(tau) = e(0) + e(tau) - 2 r(tau), with r the cross-correlation of the
  // first half against the whole frame. No circular wrap: j + tau < 2W <= n.
  std::size_t n = 1;
  while (n < frame.size()) n <<= 1;
  const RealFft fft(n);
  RealFft::Workspace wa(fft);
  RealFft::Workspace wb(fft);
  auto a = wa.input();
  auto b = wb.input();
  std::fill(a.begin(), a.end(), 0.0);
  std::fill(b.begin(), b.end(), 0.0);
  std::copy_n(frame.begin(), w, a.begin());
  std::copy(frame.begin(), frame.end(), b.begin());
  fft.forward(wa);
  fft.forward(wb);
  auto spec = wb.spectrum();
  const auto spec_a = wa.output();
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= std::conj(spec_a[k]);
  fft.backward(wb);
  const auto r = wb.input();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> prefix(frame.size() + 1, 0.0);
  for (std::size_t i = 0; i < frame.size(); ++i) prefix[i + 1] = prefix[i] + frame[i] * frame[i];
  const double e0 = prefix[w];
  for (std::size_t tau = 1; tau <= w; ++tau) {
    const double et = prefix[tau + w] - prefix[tau];
    d[tau] = std::max(0.0, e0 + et - 2.0 * r[tau] * inv_n);
  }
  return d;
}

std::vector<double> yin_cmnd(std::span<const double> diff) {
  std::vector<double> out(diff.size(), 1.0);
  double running = 0.0;
  for (std::size_t tau = 1; tau < diff.size(); ++tau) {
    running += diff[tau];
    out[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
  }
  return out;
}

namespace {

F0 frame_pitch(std::span<const double> frame, int sample_rate, const YinConfig& cfg) {
  const auto diff = yin_difference(frame, cfg.method);
  const auto cmnd = yin_cmnd(diff);
  const std::size_t w = cmnd.size() - 1;
  const auto tau_min = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(sample_rate / cfg.f_max)));
  const auto tau_max =
      std::min(w - 1, static_cast<std::size_t>(std::ceil(sample_rate / cfg.f_min)));

  // A dip counts once its sampled value, or the parabolic vertex through a
  // local minimum, falls below threshold. The vertex test matters for short
  // periods, where integer lags can sit half a sample off the true one.
  auto vertex = [&](std::size_t t) {
    const double a = cmnd[t - 1], b = cmnd[t], c = cmnd[t + 1];
    const double den = a - 2.0 * b + c;
    return den > 0.0 ? b - 0.125 * (a - c) * (a - c) / den : b;
  };
  std::size_t tau = tau_min;
  for (; tau <= tau_max; ++tau) {
    if (cmnd[tau] < cfg.threshold) break;
    if (cmnd[tau] <= cmnd[tau - 1] && cmnd[tau] <= cmnd[tau + 1] &&
        vertex(tau) < cfg.threshold) {
      break;
    }
  }
  if (tau > tau_max) return std::nullopt;
  // Deepest below-threshold point within half an octave of the first
  // crossing. Ripple and band-edge side dips sit a few lags from the period;
  // the window stops well short of the double-period dip.
  const auto window_end = std::min(
      tau_max, static_cast<std::size_t>(std::floor(static_cast<double>(tau) * std::numbers::sqrt2)));
  const std::size_t first = tau;
  for (std::size_t t = first + 1; t <= window_end; ++t) {
    if (cmnd[t] < cfg.threshold && cmnd[t] < cmnd[tau]) tau = t;
  }
  while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;

  // Refine on the raw difference: d' carries a tau/sum tilt that biases the
  // vertex, d itself is symmetric about the true period.
  double refined = static_cast<double>(tau);
  const double s0 = diff[tau - 1];
  const double s1 = diff[tau];
  const double s2 = diff[tau + 1];
  const double denom = s0 - 2.0 * s1 + s2;
  if (denom > 0.0) {
    const double shift = 0.5 * (s0 - s2) / denom;
    if (std::abs(shift) < 1.0) refined += shift;
  }
  return sample_rate / refined;
}

}  // namespace

namespace {

// Zero-phase low-pass: unit gain up to f_max, raised-cosine roll-off to
// min(1.25 f_max, Nyquist). Zero-padded to twice the length so nothing wraps.
std::vector<double> lowpass(std::span<const float> x, int sample_rate, double f_max) {
  std::size_t n = 2;
  while (n < 2 * x.size()) n <<= 1;
  const RealFft fft(n);
  RealFft::Workspace ws(fft);
  auto in = ws.input();
  std::fill(in.begin(), in.end(), 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  fft.forward(ws);
  auto spec = ws.spectrum();
  const double nyquist = sample_rate / 2.0;
  const double stop = std::min(1.25 * f_max, nyquist);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double hz = static_cast<double>(k) * bin_hz;
    double g = 1.0;
    if (hz > f_max) {
      g = hz >= stop ? 0.0 : 0.5 * (1.0 + std::cos(std::numbers::pi * (hz - f_max) / (stop - f_max)));
    }
    spec[k] *= g * scale;
  }
  fft.backward(ws);
  return {in.begin(), in.begin() + static_cast<std::ptrdiff_t>(x.size())};
}

}  // namespace

std::vector<F0> yin_f0(std::span<const float> x, int sample_rate, const YinConfig& cfg) {
  cfg.validate(sample_rate);
  if (x.size() < cfg.frame_size) {
    throw Error(ErrorCode::TooShort, "signal of " + std::to_string(x.size()) +
                                         " samples is shorter than the YIN frame");
  }
  const std::vector<double> signal =
      cfg.prefilter ? lowpass(x, sample_rate, cfg.f_max) : std::vector<double>(x.begin(), x.end());
  const std::size_t frames = (x.size() - cfg.frame_size) / cfg.hop_size + 1;
  std::vector<F0> out(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::span<const double> frame(signal.data() + t * cfg.hop_size, cfg.frame_size);
    out[t] = frame_pitch(frame, sample_rate, cfg);
  }
  return out;
}

F0 median_pitch(std::span<const F0> frames) {
  std::vector<double> voiced;
  for (const auto& f : frames) {
    if (f) voiced.push_back(*f);
  }
  if (voiced.empty()) return std::nullopt;
  std::sort(voiced.begin(), voiced.end());
  const std::size_t mid = voiced.size() / 2;
  if (voiced.size() % 2 == 1) return voiced[mid];
  return 0.5 * (voiced[mid - 1] + voiced[mid]);
}

double hz_to_midi(double hz) {
  if (!(hz > 0.0)) throw Error(ErrorCode::NonPositiveFrequency, "frequency must be positive");
  return 69.0 + 12.0 * std::log2(hz / 440.0);
}

double midi_to_hz(double midi) { return 440.0 * std::exp2((midi - 69.0) / 12.0); }

std::string_view to_string(MadMode mode) {
  return mode == MadMode::MeanAbs ? "mean_abs" : "median_abs";
}

PitchEntry estimate_sample_pitch(const Sample& sample, const YinConfig& cfg) {
  PitchEntry entry;
  entry.key = sample.key();
  try {
    const auto frames = yin_f0(sample.samples, sample.sample_rate, cfg);
    entry.f0_hz = median_pitch(frames);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), sample.key().label());
  }
  if (entry.f0_hz) {
    entry.midi_est = hz_to_midi(*entry.f0_hz);
    entry.deviation = *entry.midi_est - sample.meta.pitch;
  }
  return entry;
}

PitchReport mad_report(const Instrument& inst, const YinConfig& cfg, MadMode mode,
                       Backend backend) {
  PitchReport report;
  report.mode = mode;
  report.per_sample.resize(inst.size());

  if (backend == Backend::Serial) {
    for (std::size_t k = 0; k < inst.size(); ++k) {
      report.per_sample[k] = estimate_sample_pitch(inst[k], cfg);
    }
  } else {
    std::exception_ptr failure;
    std::ptrdiff_t failed_at = -1;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(inst.size()); ++k) {
      try {
        report.per_sample[static_cast<std::size_t>(k)] =
            estimate_sample_pitch(inst[static_cast<std::size_t>(k)], cfg);
      } catch (...) {
#pragma omp critical(ieval_pitch_error)
        if (failed_at < 0 || k < failed_at) {
          failed_at = k;
          failure = std::current_exception();
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> abs_dev;
  for (const auto& e : report.per_sample) {
    if (e.deviation) {
      abs_dev.push_back(std::abs(*e.deviation));
    } else {
      ++report.unvoiced;
    }
  }
  report.voiced = abs_dev.size();
  if (abs_dev.empty()) {
    throw Error(ErrorCode::AllUnvoiced, "no sample produced a pitch estimate", inst.name());
  }
  if (mode == MadMode::MeanAbs) {
    double sum = 0.0;
    for (double v : abs_dev) sum += v;
    report.mad = sum / static_cast<double>(abs_dev.size());
  } else {
    std::sort(abs_dev.begin(), abs_dev.end());
    const std::size_t mid = abs_dev.size() / 2;
    report.mad = abs_dev.size() % 2 == 1 ? abs_dev[mid] : 0.5 * (abs_dev[mid - 1] + abs_dev[mid]);
  }
  return report;
}

nlohmann::ordered_json pitch_report_json(const PitchReport& report) {
  nlohmann::ordered_json j;
  j["mad"] = report.mad;
  j["mode"] = to_string(report.mode);
  j["voiced"] = report.voiced;
  j["unvoiced"] = report.unvoiced;
  auto& list = j["per_sample"] = nlohmann::ordered_json::array();
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto& e : report.per_sample) {
    nlohmann::ordered_json item;
    item["pitch"] = e.key.pitch;
    item["velocity"] = e.key.velocity;
    item["f0_hz"] = opt(e.f0_hz);
    item["midi_est"] = opt(e.midi_est);
    item["deviation"] = opt(e.deviation);
    list.push_back(std::move(item));
  }
  return j;
}

}  // namespace ieval
