// Microbenchmarks for the hot kernels: correlation construction, the two
// submanifold convolution paths and the full pair-matching pass.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "sncnet/conv_network.hpp"
#include "sncnet/correlation.hpp"
#include "sncnet/feature_map.hpp"
#include "sncnet/pipeline.hpp"

namespace {

sncnet::FeatureMap random_map(std::uint32_t seed, int h, int w, int c) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> values(std::size_t(h) * w * c);
  for (float& v : values) v = dist(rng);
  return sncnet::FeatureMap::normalised(h, w, c, std::move(values));
}

// Correlation output is the natural workload for the convolution benches.
sncnet::SparseTensor4D correlation_fixture() {
  const sncnet::FeatureMap a = random_map(11, 30, 25, 8);
  const sncnet::FeatureMap b = random_map(12, 25, 30, 8);
  return sncnet::symmetric_correlation(a, b, {10, true});
}

void BM_TopkCorrelation(benchmark::State& state) {
  const sncnet::FeatureMap a = random_map(1, 40, 30, 16);
  const sncnet::FeatureMap b = random_map(2, 30, 40, 16);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sncnet::topk_correlation(a, b, k));
  }
}
BENCHMARK(BM_TopkCorrelation)->Arg(5)->Arg(10)->Arg(20);

void BM_SubmanifoldConvBaseline(benchmark::State& state) {
  const sncnet::SparseTensor4D input = correlation_fixture();
  const sncnet::ConvLayer layer = sncnet::seeded_init(3, 16).layers[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(sncnet::submanifold_conv(input, layer));
  }
  state.counters["sites"] = static_cast<double>(input.size());
}
BENCHMARK(BM_SubmanifoldConvBaseline);

void BM_SubmanifoldConvKernelMap(benchmark::State& state) {
  const sncnet::SparseTensor4D input = correlation_fixture();
  const sncnet::ConvLayer layer = sncnet::seeded_init(3, 16).layers[0];
  const sncnet::KernelMap map = sncnet::KernelMap::build(input);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sncnet::submanifold_conv(input, layer, map));
  }
  state.counters["sites"] = static_cast<double>(input.size());
}
BENCHMARK(BM_SubmanifoldConvKernelMap);

void BM_KernelMapBuild(benchmark::State& state) {
  const sncnet::SparseTensor4D input = correlation_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sncnet::KernelMap::build(input));
  }
}
BENCHMARK(BM_KernelMapBuild);

void BM_MatchPair(benchmark::State& state) {
  const sncnet::FeatureMap fine_a = random_map(21, 32, 40, 16);
  const sncnet::FeatureMap fine_b = random_map(22, 32, 40, 16);
  const sncnet::ConvNetwork net = sncnet::seeded_init(23, 16);
  const sncnet::PipelineConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sncnet::match_pair(fine_a, fine_b, net, cfg));
  }
}
BENCHMARK(BM_MatchPair);

} // namespace

BENCHMARK_MAIN();
