#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ieval/dsp.hpp"
#include "ieval/instrument.hpp"
#include "ieval/kernels.hpp"
#include "ieval/matrix.hpp"

namespace ieval {

struct TcConfig {
  std::vector<ScaleConfig> scales{ScaleConfig{}};
  Normalization normalization = Normalization::Mean;
  bool exclude_dc = false;
  Backend backend = Backend::OpenMP;

  void validate() const;
};

struct TcResult {
  double tc = 0.0;
  Matrix pair_matrix;  // K x K, summed over scales
  std::size_t K = 0;
  std::vector<double> per_scale;
  std::vector<SampleKey> keys;  // row/column labels, canonical order
};

// Timbral consistency: sum over unordered pairs and scales of the L1
// distance between liftered log-mel features. With Normalization::Mean each
// per-scale distance is averaged over its elements and the total over pairs.
// Throws EmptyInstrument (K < 2) or TooShort naming the offending sample.
TcResult tc_measure(const Instrument& inst, const TcConfig& cfg = {});

std::string tc_pair_matrix_csv(const TcResult& res);

std::string_view to_string(Normalization norm);

nlohmann::ordered_json tc_result_json(const TcResult& res, const TcConfig& cfg,
                                      const std::optional<std::string>& pair_matrix_file = {});

}  // namespace ieval
