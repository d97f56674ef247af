#include <omp.h>

#include <exception>
#include <optional>

#include "ieval/errors.hpp"
#include "ieval/kernels.hpp"

namespace ieval::omp {

FeatureTable extract_features(const Instrument& inst, std::span<const FeatureExtractor> scales) {
  const auto n_samples = static_cast<std::ptrdiff_t>(inst.size());
  const auto n_scales = static_cast<std::ptrdiff_t>(scales.size());
  const std::ptrdiff_t jobs = n_samples * n_scales;
  FeatureTable table(inst.size(), scales.size());

  // Exceptions cannot cross the parallel region; keep the lowest-index one
  // so the reported error does not depend on scheduling.
  std::optional<std::ptrdiff_t> failed_at;
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t job = 0; job < jobs; ++job) {
    const auto k = static_cast<std::size_t>(job / n_scales);
    const auto s = static_cast<std::size_t>(job % n_scales);
    try {
      table.at(k, s) = scales[s].compute(inst[k].samples, s).y;
    } catch (const Error& e) {
#pragma omp critical(ieval_feature_error)
      if (!failed_at || job < *failed_at) {
        failed_at = job;
        failure = std::make_exception_ptr(Error(e.code(), e.what(), inst[k].key().label()));
      }
    } catch (...) {
#pragma omp critical(ieval_feature_error)
      if (!failed_at || job < *failed_at) {
        failed_at = job;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

PairTable pair_distances(const FeatureTable& features, Normalization norm) {
  const std::size_t n = features.samples();
  PairTable pairs(n, features.scales());
  for (std::size_t s = 0; s < features.scales(); ++s) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t row = 0; row < static_cast<std::ptrdiff_t>(n); ++row) {
      const auto i = static_cast<std::size_t>(row);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = scale_distance(features.at(i, s), features.at(j, s), norm);
        pairs.at(s, i, j) = d;
        pairs.at(s, j, i) = d;
      }
    }
  }
  return pairs;
}

}  // namespace ieval::omp
