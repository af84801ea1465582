#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spsa/errors.hpp"
#include "spsa/feas_lti.hpp"
#include "spsa/json_io.hpp"
#include "test_util.hpp"

using namespace spsa;
using spsa::test::Rng;
using Catch::Approx;

namespace {

LtiAdmittance scalar_sys(double a, double b, double c, double d) {
  MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << a;
  B << b;
  C << c;
  D << d;
  return LtiAdmittance(A, B, C, D);
}

LtiAdmittance static1(double d) {
  MatrixXd D(1, 1);
  D << d;
  return LtiAdmittance::static_gain(D);
}

LossParams loss_n(int np, double r, double tau_s, double tau_r) {
  return LossParams(VectorXd::Constant(np, r), tau_s, tau_r);
}

const LtiAdmittance& building() {
  static const LtiAdmittance sys = std::get<LtiAdmittance>(
      load_system_json(std::string(SPSA_DATA_DIR) + "/building.json"));
  return sys;
}

// mixes feasible and infeasible instances; gamma scales the output path
LtiAdmittance random_instance(Rng& rng, int n, int np, double gamma) {
  const MatrixXd A = test::random_stable_A(rng, n);
  const MatrixXd B = test::random_matrix(rng, n, np);
  const MatrixXd C = gamma * test::random_matrix(rng, np, n, 0.4);
  MatrixXd D = gamma * test::random_matrix(rng, np, np, 0.15);
  D.diagonal().array() += 0.4;  // bias toward a passive-ish feedthrough
  return LtiAdmittance(A, B, C, D);
}

}  // namespace

TEST_CASE("paper design point: building system feasible at (1,1), 10 s, 0.075 s",
          "[feas_lti][paper]") {
  const LossParams loss = loss_n(2, 1.0, 10.0, 0.075);
  LmiProblem p = assemble_sufficient(building(), loss);
  const SolveResult r = solve_feasibility(p, 1e-7);
  REQUIRE(r.status == FeasStatus::Feasible);
  const HinfCheck h = check_necessary_hinf(building(), loss);
  REQUIRE(h.pass);
  REQUIRE(h.norm <= 1.0 + 1e-7);
}

TEST_CASE("static regime: scalar feasibility is 0 <= d <= 1/r", "[feas_lti]") {
  // derived 2x2 eigenvalue oracle: eigenvalues -1/r +- (2d - 1/r)
  auto oracle = [](double d, double r) { return -1.0 / r + std::abs(2.0 * d - 1.0 / r); };
  Rng rng(21);
  for (int i = 0; i < 60; ++i) {
    const double d = rng.uniform(-0.5, 2.0);
    const double r = std::exp(rng.uniform(-1.5, 1.5));
    const LossParams loss = loss_n(1, r, 10.0, kInf);
    LmiProblem p = assemble_sufficient(static1(d), loss);
    const SolveResult res = solve_feasibility(p, 1e-7);
    const double lam = oracle(d, r);
    if (lam < -1e-6) REQUIRE(res.status == FeasStatus::Feasible);
    if (lam > 1e-6) REQUIRE(res.status == FeasStatus::Infeasible);
    REQUIRE(res.certificate.worst_eig[0] == Approx(lam).margin(1e-9));
  }
  // spec anchors: d = 0.5 feasible, d = 1.5 infeasible at r = 1
  LmiProblem good = assemble_sufficient(static1(0.5), loss_n(1, 1, 10, kInf));
  REQUIRE(solve_feasibility(good, 1e-7).status == FeasStatus::Feasible);
  LmiProblem bad = assemble_sufficient(static1(1.5), loss_n(1, 1, 10, kInf));
  REQUIRE(solve_feasibility(bad, 1e-7).status == FeasStatus::Infeasible);
}

TEST_CASE("positive-real (s+2)/(s+1) is feasible at tau_r = 0", "[feas_lti]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 1.0);
  const LossParams loss = loss_n(1, 0.1, kInf, 0.0);
  LmiProblem p = assemble_sufficient(sys, loss);
  REQUIRE(solve_feasibility(p, 1e-7).status == FeasStatus::Feasible);
}

TEST_CASE("tau_r = inf with dynamics is an unsupported regime", "[feas_lti]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 0.5);
  REQUIRE_THROWS_AS(assemble_sufficient(sys, loss_n(1, 1.0, 10.0, kInf)),
                    UnsupportedRegime);
}

TEST_CASE("check_necessary_hinf: derived scalar examples", "[feas_lti]") {
  {
    // Y = 1/(s+1), R = 0.25, tau_s = inf: sup |(2rY - 1)| = max(|2r-1|, 1) = 1
    const auto sys = scalar_sys(-1.0, 1.0, 1.0, 0.0);
    const HinfCheck h = check_necessary_hinf(sys, loss_n(1, 0.25, kInf, 0.1), 1e-6);
    REQUIRE(h.shifted_stable);
    REQUIRE(h.norm == Approx(1.0).epsilon(1e-5));
    REQUIRE(h.pass);
  }
  {
    // static d, r in the passive square: norm = |2 r d - 1| <= 1
    const HinfCheck h = check_necessary_hinf(static1(0.3), loss_n(1, 2.0, 10.0, 0.1));
    REQUIRE(h.norm == Approx(std::abs(2.0 * 2.0 * 0.3 - 1.0)).epsilon(1e-9));
    REQUIRE(h.pass);
  }
  {
    // Y = -1/(s+1), R = 1: |2 Y(0) - 1| = 3 > 1 -> fail
    const auto sys = scalar_sys(-1.0, 1.0, -1.0, 0.0);
    const HinfCheck h = check_necessary_hinf(sys, loss_n(1, 1.0, kInf, 0.1));
    REQUIRE_FALSE(h.pass);
    REQUIRE(h.norm >= 3.0 - 1e-6);
  }
  {
    // shifted instability: pole at -1 moves into the RHP for tau_s < 1
    const auto sys = scalar_sys(-1.0, 1.0, 1.0, 0.0);
    const HinfCheck h = check_necessary_hinf(sys, loss_n(1, 1.0, 0.5, 0.1));
    REQUIRE_FALSE(h.shifted_stable);
    REQUIRE_FALSE(h.pass);
    REQUIRE(h.unstable_real == Approx(1.0));  // -1 + 1/0.5
  }
}

TEST_CASE("check_necessary_lmi agrees with the H-inf route", "[feas_lti][property]") {
  Rng rng(2718);
  int decided = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + rng.index(4);
    const int np = 1 + rng.index(2);
    const double gamma = std::exp(rng.uniform(-1.0, 1.2));
    const LtiAdmittance sys = random_instance(rng, n, np, gamma);
    const double r = std::exp(rng.uniform(-1.5, 0.7));
    const LossParams loss = loss_n(np, r, std::exp(rng.uniform(0.5, 3.0)), 0.1);
    const HinfCheck h = check_necessary_hinf(sys, loss);
    const SolveResult l = check_necessary_lmi(sys, loss);
    if (!h.shifted_stable) {
      // Ytilde not in H-inf: the LMI must not certify feasibility
      REQUIRE(l.status != FeasStatus::Feasible);
      continue;
    }
    const double band = 1e-3;
    if (std::abs(h.norm - 1.0) <= band || l.status == FeasStatus::Indeterminate) continue;
    ++decided;
    if (h.norm < 1.0 - band) REQUIRE(l.status == FeasStatus::Feasible);
    if (h.norm > 1.0 + band) REQUIRE(l.status == FeasStatus::Infeasible);
  }
  REQUIRE(decided >= 20);  // the generator must actually exercise both sides
}

TEST_CASE("theorem 4: sufficiency equals necessity at tau_r = 0", "[feas_lti][property]") {
  Rng rng(31415);
  int decided = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + rng.index(6);
    const int np = 1 + rng.index(2);
    const double gamma = std::exp(rng.uniform(-1.2, 1.2));
    const LtiAdmittance sys = random_instance(rng, n, np, gamma);
    const LossParams loss = loss_n(np, std::exp(rng.uniform(-1.0, 0.7)),
                                   std::exp(rng.uniform(0.5, 3.0)), 0.0);
    const Theorem4Report rep = check_theorem4_equivalence(sys, loss);
    REQUIRE(rep.agree);
    if (rep.both_decided) ++decided;
  }
  REQUIRE(decided >= 30);
}

TEST_CASE("theorem 4: both routes reject an active admittance", "[feas_lti]") {
  const auto sys = scalar_sys(-1.0, 1.0, -1.0, 0.0);  // Y = -1/(s+1)
  const LossParams loss = loss_n(1, 1.0, kInf, 0.0);
  const Theorem4Report rep = check_theorem4_equivalence(sys, loss);
  REQUIRE(rep.sufficient.status == FeasStatus::Infeasible);
  REQUIRE(rep.necessary.status == FeasStatus::Infeasible);
}

TEST_CASE("certificate monotonicity in (R, tau_s, tau_r)", "[feas_lti][property]") {
  // a certificate for (R, tau_s, tau_r) re-verifies at R' <= R, tau_s' >= tau_s,
  // tau_r' <= tau_r: the R dependence enters as -[I;I] R^-1 [I I], the tau_s
  // term as +2 P / tau_s, the tau_r term as -(1/tau_r) P
  const LossParams loss = loss_n(2, 1.0, 10.0, 0.075);
  LmiProblem p = assemble_sufficient(building(), loss);
  const SolveResult r = solve_feasibility(p, 1e-7);
  REQUIRE(r.status == FeasStatus::Feasible);

  Rng rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    const double r_scale = rng.uniform(0.3, 1.0);
    const double ts_scale = rng.uniform(1.0, 4.0);
    const double tr_scale = rng.uniform(0.2, 1.0);
    const LossParams easier =
        loss_n(2, r_scale * 1.0, ts_scale * 10.0, tr_scale * 0.075);
    LmiProblem pe = assemble_sufficient(building(), easier);
    pe.finalize();
    const VerifyReport rep = verify(pe, r.certificate.values);
    REQUIRE(rep.margin >= 0.0);
  }
}

TEST_CASE("analyze enforces sufficient => necessary and reports the regime",
          "[feas_lti]") {
  const LossParams loss = loss_n(2, 1.0, 10.0, 0.075);
  const FeasVerdict v = analyze(building(), loss);
  REQUIRE(v.regime == Regime::Generic);
  REQUIRE(v.sufficient.status == FeasStatus::Feasible);
  REQUIRE(v.necessary.pass);
  REQUIRE(v.necessary_lmi.status == FeasStatus::Feasible);
  REQUIRE(regime_of(loss_n(1, 1, 10, 0.0)) == Regime::TauRZero);
  REQUIRE(regime_of(loss_n(1, 1, 10, kInf)) == Regime::TauRInfinite);
}

TEST_CASE("port-count mismatches are rejected", "[feas_lti]") {
  REQUIRE_THROWS_AS(assemble_sufficient(building(), loss_n(1, 1.0, 10.0, 0.075)),
                    DimensionMismatch);
}
