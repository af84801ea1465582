#include <benchmark/benchmark.h>

#include "spsa/energy.hpp"

namespace {

void BM_SimulateLeakage(benchmark::State& state) {
  spsa::MatrixXd D(1, 1);
  D << 0.5;
  const auto sys = spsa::LtiAdmittance::static_gain(D);
  const spsa::LossParams loss(spsa::VectorXd::Constant(1, 1.0), 5.0, 0.1);
  const spsa::Signal v = spsa::sine_signal(1, 1.0, 2.0, 20.0, 1e-3);
  for (auto _ : state) {
    const auto traj = spsa::simulate(sys, v, 1.0, loss, 1e-3);
    benchmark::DoNotOptimize(traj.E_s.back());
  }
}
BENCHMARK(BM_SimulateLeakage)->Unit(benchmark::kMillisecond);

void BM_StoragePower(benchmark::State& state) {
  const spsa::LossParams loss(spsa::VectorXd::Constant(1, 1.0), 5.0, 0.1);
  double es = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spsa::storage_power(es, 2.0, loss));
    es = es == 1.0 ? 2.0 : 1.0;
  }
}
BENCHMARK(BM_StoragePower);

}  // namespace
