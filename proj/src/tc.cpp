#include "ieval/tc.hpp"

#include <cstdio>

#include "ieval/errors.hpp"

namespace ieval {

void TcConfig::validate() const {
  if (scales.empty()) throw Error(ErrorCode::InvalidConfig, "at least one scale is required");
  for (const auto& s : scales) s.validate();
}

std::string_view to_string(Normalization norm) {
  return norm == Normalization::Mean ? "mean" : "none";
}

TcResult tc_measure(const Instrument& inst, const TcConfig& cfg) {
  cfg.validate();
  const std::size_t k = inst.size();
  if (k < 2) {
    throw Error(ErrorCode::EmptyInstrument, "timbral consistency needs at least 2 samples",
                inst.name());
  }

  std::vector<FeatureExtractor> extractors;
  extractors.reserve(cfg.scales.size());
  for (const auto& scale : cfg.scales) {
    extractors.emplace_back(scale, inst.sample_rate(), cfg.exclude_dc);
  }

  const bool serial = cfg.backend == Backend::Serial;
  const FeatureTable features =
      serial ? serial::extract_features(inst, extractors) : omp::extract_features(inst, extractors);
  const PairTable pairs = serial ? serial::pair_distances(features, cfg.normalization)
                                 : omp::pair_distances(features, cfg.normalization);

  TcResult res;
  res.K = k;
  res.pair_matrix = Matrix(k, k);
  res.per_scale.assign(cfg.scales.size(), 0.0);
  for (const auto& sample : inst.samples()) res.keys.push_back(sample.key());

  // Canonical lexicographic (i, j) reduction, single-threaded.
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double d = 0.0;
      for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
        d += pairs.at(s, i, j);
        res.per_scale[s] += pairs.at(s, i, j);
      }
      res.pair_matrix(i, j) = d;
      res.pair_matrix(j, i) = d;
      total += d;
    }
  }
  if (cfg.normalization == Normalization::Mean) {
    const double n_pairs = static_cast<double>(k * (k - 1) / 2);
    total /= n_pairs;
    for (double& v : res.per_scale) v /= n_pairs;
  }
  res.tc = total;
  return res;
}

std::string tc_pair_matrix_csv(const TcResult& res) {
  std::string out = "key";
  for (const auto& key : res.keys) out += "," + key.label();
  out += "\n";
  char buf[40];
  for (std::size_t i = 0; i < res.K; ++i) {
    out += res.keys[i].label();
    for (std::size_t j = 0; j < res.K; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", res.pair_matrix(i, j));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json tc_result_json(const TcResult& res, const TcConfig& cfg,
                                      const std::optional<std::string>& pair_matrix_file) {
  nlohmann::ordered_json j;
  j["tc"] = res.tc;
  j["K"] = res.K;
  j["S"] = cfg.scales.size();
  j["normalization"] = to_string(cfg.normalization);
  j["exclude_dc"] = cfg.exclude_dc;
  j["per_scale"] = res.per_scale;
  j["pair_matrix_file"] = pair_matrix_file ? nlohmann::ordered_json(*pair_matrix_file) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace ieval
