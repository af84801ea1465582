#include <benchmark/benchmark.h>

#include "spsa/fo.hpp"

namespace {

void BM_FoMaxTauR(benchmark::State& state) {
  const auto f = spsa::design_from_specs(30.0, 1.0, 1.0, 0.5);
  for (auto _ : state) {
    const auto r = spsa::fo_max_tau_r(f, 0.1, 10.0);
    benchmark::DoNotOptimize(r.tau_r);
  }
}
BENCHMARK(BM_FoMaxTauR)->Unit(benchmark::kMillisecond);

void BM_DesignFromSpecs(benchmark::State& state) {
  for (auto _ : state) {
    const auto f = spsa::design_from_specs(30.0, 1.0, 1.0, 0.354);
    benchmark::DoNotOptimize(f.k_p);
  }
}
BENCHMARK(BM_DesignFromSpecs);

}  // namespace
