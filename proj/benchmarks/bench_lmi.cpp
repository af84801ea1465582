#include <benchmark/benchmark.h>

#include "spsa/feas_lti.hpp"
#include "spsa/json_io.hpp"
#include "spsa/lmi.hpp"

namespace {

const spsa::LtiAdmittance& building() {
  static const spsa::LtiAdmittance sys = std::get<spsa::LtiAdmittance>(
      spsa::load_system_json(std::string(SPSA_DATA_DIR) + "/building.json"));
  return sys;
}

void BM_AssembleSufficient(benchmark::State& state) {
  const spsa::LossParams loss(spsa::VectorXd::Constant(2, 1.0), 10.0, 0.075);
  for (auto _ : state) {
    spsa::LmiProblem p = spsa::assemble_sufficient(building(), loss);
    p.finalize();
    benchmark::DoNotOptimize(p.num_vars());
  }
}
BENCHMARK(BM_AssembleSufficient);

void BM_SolveBuildingSufficiency(benchmark::State& state) {
  const spsa::LossParams loss(spsa::VectorXd::Constant(2, 1.0), 10.0, 0.075);
  for (auto _ : state) {
    spsa::LmiProblem p = spsa::assemble_sufficient(building(), loss);
    const spsa::SolveResult r = spsa::solve_feasibility(p, 1e-7);
    benchmark::DoNotOptimize(r.margin);
  }
}
BENCHMARK(BM_SolveBuildingSufficiency)->Unit(benchmark::kMillisecond);

void BM_NecessaryHinf(benchmark::State& state) {
  const spsa::LossParams loss(spsa::VectorXd::Constant(2, 1.0), 10.0, 0.075);
  for (auto _ : state) {
    const auto r = spsa::check_necessary_hinf(building(), loss);
    benchmark::DoNotOptimize(r.norm);
  }
}
BENCHMARK(BM_NecessaryHinf)->Unit(benchmark::kMillisecond);

}  // namespace
