#include <cmath>

#include "ieval/errors.hpp"
#include "ieval/kernels.hpp"

namespace ieval {

double l1_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += std::abs(a[i] - b[i]);
    acc[1] += std::abs(a[i + 1] - b[i + 1]);
    acc[2] += std::abs(a[i + 2] - b[i + 2]);
    acc[3] += std::abs(a[i + 3] - b[i + 3]);
  }
  for (; i < n; ++i) acc[0] += std::abs(a[i] - b[i]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double scale_distance(const Matrix& a, const Matrix& b, Normalization norm) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::InvalidConfig, "feature shapes differ");
  }
  const double l1 = l1_distance(a.data(), b.data());
  return norm == Normalization::Mean ? l1 / static_cast<double>(a.size()) : l1;
}

namespace serial {

FeatureTable extract_features(const Instrument& inst, std::span<const FeatureExtractor> scales) {
  FeatureTable table(inst.size(), scales.size());
  for (std::size_t k = 0; k < inst.size(); ++k) {
    for (std::size_t s = 0; s < scales.size(); ++s) {
      try {
        table.at(k, s) = scales[s].compute(inst[k].samples, s).y;
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), inst[k].key().label());
      }
    }
  }
  return table;
}

PairTable pair_distances(const FeatureTable& features, Normalization norm) {
  const std::size_t n = features.samples();
  PairTable pairs(n, features.scales());
  for (std::size_t s = 0; s < features.scales(); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = scale_distance(features.at(i, s), features.at(j, s), norm);
        pairs.at(s, i, j) = d;
        pairs.at(s, j, i) = d;
      }
    }
  }
  return pairs;
}

}  // namespace serial
}  // namespace ieval
