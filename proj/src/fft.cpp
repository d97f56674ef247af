#include "ieval/fft.hpp"

#include <fftw3.h>

#include <map>
#include <utility>
#include <mutex>

#include "ieval/errors.hpp"

namespace ieval {
namespace {

// FFTW's planner is not thread-safe; plans live for the process lifetime.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(std::size_t n, bool inverse) {
  static std::map<std::pair<std::size_t, bool>, fftw_plan> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find({n, inverse}); it != cache.end()) return it->second;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  const int size = static_cast<int>(n);
  fftw_plan p = inverse ? fftw_plan_dft_c2r_1d(size, out, in, FFTW_ESTIMATE)
                        : fftw_plan_dft_r2c_1d(size, in, out, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  cache.emplace(std::pair{n, inverse}, p);
  return p;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

RealFft::RealFft(std::size_t size) : size_(size), plan_(nullptr), inverse_plan_(nullptr) {
  if (!is_power_of_two(size) || size < 2) {
    throw Error(ErrorCode::InvalidConfig, "FFT size must be a power of two >= 2");
  }
  plan_ = plan_for(size, false);
  inverse_plan_ = plan_for(size, true);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

RealFft::Workspace::Workspace(const RealFft& fft)
    : n_(fft.size()),
      in_(fftw_alloc_real(fft.size())),
      out_(fftw_alloc_complex(fft.bins())) {}

RealFft::Workspace::~Workspace() {
  fftw_free(in_);
  fftw_free(out_);
}

std::span<const std::complex<double>> RealFft::Workspace::output() const noexcept {
  // fftw_complex is layout-compatible with std::complex<double>.
  return {reinterpret_cast<const std::complex<double>*>(out_), n_ / 2 + 1};
}

std::span<std::complex<double>> RealFft::Workspace::spectrum() noexcept {
  return {reinterpret_cast<std::complex<double>*>(out_), n_ / 2 + 1};
}

void RealFft::backward(Workspace& ws) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), static_cast<fftw_complex*>(ws.out_),
                       ws.in_);
}

void RealFft::forward(Workspace& ws) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), ws.in_, static_cast<fftw_complex*>(ws.out_));
}

}  // namespace ieval
