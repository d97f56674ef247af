#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace ieval {

// Real-to-complex forward DFT of a fixed power-of-two size, backed by FFTW.
// Plans are created once per size and shared; `forward` is safe to call
// concurrently from any number of threads.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return size_; }
  std::size_t bins() const noexcept { return size_ / 2 + 1; }

  // Aligned per-call scratch; construct one per thread and reuse.
  class Workspace {
   public:
    explicit Workspace(const RealFft& fft);
    ~Workspace();
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    std::span<double> input() noexcept { return {in_, n_}; }
    std::span<const std::complex<double>> output() const noexcept;
    std::span<std::complex<double>> spectrum() noexcept;

   private:
    friend class RealFft;
    std::size_t n_;
    double* in_;
    void* out_;
  };

  // Transforms ws.input() into ws.output() (size/2 + 1 bins, unnormalized).
  void forward(Workspace& ws) const;
  // Inverse of forward without the 1/size factor: ws.spectrum() -> ws.input().
  // The spectrum is overwritten.
  void backward(Workspace& ws) const;

 private:
  std::size_t size_;
  void* plan_;
  void* inverse_plan_;
};

bool is_power_of_two(std::size_t n);

}  // namespace ieval
