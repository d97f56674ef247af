// Serial vs OpenMP kernels on a synthetic instrument. Arg: number of samples K.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <iterator>
#include <map>
#include <vector>

#include "ieval/kernels.hpp"
#include "ieval/synth.hpp"

using namespace ieval;

namespace {

const Instrument& instrument(int k) {
  static std::map<int, Instrument> cache;
  auto it = cache.find(k);
  if (it == cache.end()) {
    // min(k, 88) pitches times ceil(k / 88) grid velocities.
    SynthProfile p;
    p.pitch_set.clear();
    for (int i = 0; i < std::min(k, 88); ++i) p.pitch_set.push_back(kMinGridPitch + i);
    p.velocity_set.assign(std::begin(kGridVelocities), std::begin(kGridVelocities) + (k + 87) / 88);
    p.n_harmonics = 16;
    p.duration_s = 2.0;
    it = cache.emplace(k, synth_instrument(p)).first;
  }
  return it->second;
}

std::vector<FeatureExtractor> extractors(int rate) {
  std::vector<FeatureExtractor> v;
  v.emplace_back(ScaleConfig{}, rate);
  return v;
}

template <bool Parallel>
void BM_ExtractFeatures(benchmark::State& state) {
  const auto& inst = instrument(static_cast<int>(state.range(0)));
  const auto scales = extractors(inst.sample_rate());
  for (auto _ : state) {
    auto table = Parallel ? omp::extract_features(inst, scales) : serial::extract_features(inst, scales);
    benchmark::DoNotOptimize(table);
  }
  state.counters["K"] = static_cast<double>(inst.size());
}

template <bool Parallel>
void BM_PairDistances(benchmark::State& state) {
  const auto& inst = instrument(static_cast<int>(state.range(0)));
  const auto table = serial::extract_features(inst, extractors(inst.sample_rate()));
  for (auto _ : state) {
    auto pairs = Parallel ? omp::pair_distances(table, Normalization::Mean)
                          : serial::pair_distances(table, Normalization::Mean);
    benchmark::DoNotOptimize(pairs);
  }
  state.counters["K"] = static_cast<double>(inst.size());
}

}  // namespace

BENCHMARK(BM_ExtractFeatures<false>)->Name("extract_features/serial")->Arg(32)->Arg(264)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExtractFeatures<true>)->Name("extract_features/omp")->Arg(32)->Arg(264)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairDistances<false>)->Name("pair_distances/serial")->Arg(32)->Arg(264)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairDistances<true>)->Name("pair_distances/omp")->Arg(32)->Arg(264)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
