// Serial reference vs OpenMP execution of the three parallel kernels.
// Thread count follows OMP_NUM_THREADS.

#include "fms/bandwidth_scan.hpp"
#include "fms/experiments.hpp"
#include "fms/inference.hpp"

#include <benchmark/benchmark.h>

using namespace fms;

namespace {

FunctionalSample sample(std::size_t n) {
  GeneratorSpec spec;
  spec.n = n;
  spec.seed = 1;
  return generate(spec, Grid::uniform(0, 1, 101));
}

DensityModel model(std::size_t n) {
  DensityModel m(sample(n), builtin_pair("gaussian_gaussian"), DistanceSpec::l2(), BandwidthRule::fixed(1.0),
                 Normalization::none);
  return m.with_bandwidth(BandwidthRule::fixed(0.2 * m.max_pairwise_distance()));
}

Execution exec_of(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::serial : Execution::parallel;
}

void BM_Cluster(benchmark::State& state) {
  const auto m = model(static_cast<std::size_t>(state.range(0)));
  const auto exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(cluster(m, MeanShiftConfig{}, std::nullopt, exec));
}

void BM_Scan(benchmark::State& state) {
  const auto m = model(static_cast<std::size_t>(state.range(0)));
  ScanSpec spec;
  spec.n_values = 20;
  const auto exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(scan(m, spec, MeanShiftConfig{}, exec));
}

void BM_Bootstrap(benchmark::State& state) {
  const auto s = sample(static_cast<std::size_t>(state.range(0)));
  TestConfig cfg;
  cfg.n_boot = 200;
  const auto exec = exec_of(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(test_modes(s, builtin_pair("gaussian_gaussian"), DistanceSpec::l2(), PairwiseQuantile{},
                                        MeanShiftConfig{}, cfg, 1, exec));
}

}  // namespace

BENCHMARK(BM_Cluster)->ArgsProduct({{150, 600}, {0, 1}})->ArgNames({"n", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Scan)->ArgsProduct({{150}, {0, 1}})->ArgNames({"n", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap)->ArgsProduct({{150}, {0, 1}})->ArgNames({"n", "parallel"})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
