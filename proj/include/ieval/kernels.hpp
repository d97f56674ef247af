#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ieval/dsp.hpp"
#include "ieval/instrument.hpp"
#include "ieval/matrix.hpp"

namespace ieval {

enum class Normalization { None, Mean };

enum class Backend { OpenMP, Serial };

// Liftered features for every (sample, scale), sample-major.
class FeatureTable {
 public:
  FeatureTable(std::size_t samples, std::size_t scales)
      : samples_(samples), scales_(scales), y_(samples * scales) {}

  std::size_t samples() const noexcept { return samples_; }
  std::size_t scales() const noexcept { return scales_; }
  Matrix& at(std::size_t k, std::size_t s) { return y_[k * scales_ + s]; }
  const Matrix& at(std::size_t k, std::size_t s) const { return y_[k * scales_ + s]; }

 private:
  std::size_t samples_;
  std::size_t scales_;
  std::vector<Matrix> y_;
};

// Symmetric per-scale distance matrices with zero diagonal.
class PairTable {
 public:
  PairTable(std::size_t samples, std::size_t scales)
      : samples_(samples), scales_(scales), d_(scales * samples * samples, 0.0) {}

  std::size_t samples() const noexcept { return samples_; }
  std::size_t scales() const noexcept { return scales_; }
  double& at(std::size_t s, std::size_t i, std::size_t j) {
    return d_[(s * samples_ + i) * samples_ + j];
  }
  double at(std::size_t s, std::size_t i, std::size_t j) const {
    return d_[(s * samples_ + i) * samples_ + j];
  }

 private:
  std::size_t samples_;
  std::size_t scales_;
  std::vector<double> d_;
};

// Sum of |a_i - b_i| accumulated in a fixed lane order, so the result is
// bit-identical no matter which thread evaluates it.
double l1_distance(std::span<const double> a, std::span<const double> b);

// Per-scale pair distance: L1 norm, or L1 / element count for Mean.
double scale_distance(const Matrix& a, const Matrix& b, Normalization norm);

// OpenMP kernels: features parallel over (sample, scale), distances parallel
// over rows of unordered pairs. Output is independent of the thread count.
namespace omp {
FeatureTable extract_features(const Instrument& inst, std::span<const FeatureExtractor> scales);
PairTable pair_distances(const FeatureTable& features, Normalization norm);
}  // namespace omp

// Single-threaded reference versions of the same kernels.
namespace serial {
FeatureTable extract_features(const Instrument& inst, std::span<const FeatureExtractor> scales);
PairTable pair_distances(const FeatureTable& features, Normalization norm);
}  // namespace serial

}  // namespace ieval
