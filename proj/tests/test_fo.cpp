#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spsa/errors.hpp"
#include "spsa/fo.hpp"
#include "spsa/model.hpp"
#include "spsa/pareto.hpp"
#include "test_util.hpp"

using namespace spsa;
using Catch::Approx;

TEST_CASE("design_from_specs: classical lead identity at mu = 1", "[fo]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 1.0);
  // omega_h/omega_L = (1 + sin 30) / (1 - sin 30) = 3
  REQUIRE(f.omega_h / f.omega_L == Approx(3.0).epsilon(1e-12));
  REQUIRE(f.omega_L == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  REQUIRE(f.omega_h == Approx(std::sqrt(3.0)).epsilon(1e-12));
  const Complex y = eval_tf_fo(f, Complex(0.0, 1.0));
  REQUIRE(std::abs(y) == Approx(1.0).epsilon(1e-12));
  REQUIRE(std::arg(y) == Approx(M_PI / 6.0).epsilon(1e-12));
}

TEST_CASE("design_from_specs: fractional order satisfies the defining equations", "[fo]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 0.354);
  REQUIRE(std::sqrt(f.omega_L * f.omega_h) == Approx(1.0).epsilon(1e-10));
  const double phase = f.mu * (std::atan(1.0 / f.omega_L) - std::atan(1.0 / f.omega_h));
  REQUIRE(phase == Approx(30.0 * M_PI / 180.0).epsilon(1e-8));
  const Complex y = eval_tf_fo(f, Complex(0.0, 1.0));
  REQUIRE(std::abs(y) == Approx(1.0).epsilon(1e-8));
  REQUIRE(std::arg(y) == Approx(30.0 * M_PI / 180.0).epsilon(1e-8));
}

TEST_CASE("design_from_specs: unachievable specs are rejected", "[fo]") {
  REQUIRE_THROWS_AS(design_from_specs(0.0, 1.0, 1.0, 1.0), SpecUnachievable);
  REQUIRE_THROWS_AS(design_from_specs(95.0, 1.0, 1.0, 1.0), SpecUnachievable);
  REQUIRE_THROWS_AS(design_from_specs(30.0, 1.0, 1.0, 0.3), SpecUnachievable);  // 30 >= 27
  REQUIRE_THROWS_AS(design_from_specs(-30.0, 1.0, 1.0, 0.5), SpecUnachievable);  // sign
  REQUIRE_THROWS_AS(design_from_specs(30.0, 1.0, 1.0, 0.0), InvalidParameter);
}

TEST_CASE("fo_feasibility: z22 = 0 reduces to the Re{Ytilde} <= z11 grid check", "[fo]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 0.5);
  const LossParams loss(VectorXd::Constant(1, 0.1), kInf, 0.0);
  const auto grid = default_omega_grid(f);
  const double a = f.z11();
  double min_slack = kInf;
  for (double w : grid)
    min_slack = std::min(min_slack, a - shift_frequency(f, loss.tau_s, w).real());
  REQUIRE(min_slack >= 0.0);  // the lead filter satisfies Re Y <= z11
  const FoMargins m = fo_feasibility(f, loss, 0.5, 0.5, 0.0, grid);
  // with p > 0, z22 = 0 the grid family reduces to p * max(Re W) <= 0
  REQUIRE(m.freq_worst == Approx(-0.25 * min_slack).margin(1e-9));
  REQUIRE(m.ivt_value == 0.0);  // tau_r = 0 is vacuous
}

TEST_CASE("fo_feasibility: analyticity gate", "[fo]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 0.5);
  const LossParams loss(VectorXd::Constant(1, 0.1), 0.4 / f.omega_h, 0.0);
  REQUIRE_THROWS_AS(fo_feasibility(f, loss, 0.5, 0.5, 0.3, default_omega_grid(f)),
                    AnalyticityViolation);
  REQUIRE_THROWS_AS(fo_max_tau_r(f, 0.1, 0.4 / f.omega_h), AnalyticityViolation);
}

TEST_CASE("fo_feasibility: scaling invariance of the (z12, z21) split", "[fo][property]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 0.5);
  const LossParams loss(VectorXd::Constant(1, 0.1), 50.0, 0.1);
  const auto grid = default_omega_grid(f);
  const FoMargins base = fo_feasibility(f, loss, 0.6, 0.8, 0.5, grid);
  for (double alpha : {0.5, 2.0, 7.0}) {
    const FoMargins scaled = fo_feasibility(f, loss, alpha * 0.6, 0.8 / alpha, 0.5, grid);
    // frequency and initial-value families depend only on the product
    REQUIRE(scaled.freq_worst == Approx(base.freq_worst).margin(1e-12));
    REQUIRE(scaled.freq_tail == Approx(base.freq_tail).margin(1e-12));
    REQUIRE(scaled.ivt_value == Approx(base.ivt_value).margin(1e-12));
  }
}

TEST_CASE("fo_max_tau_r: verdict verified by fo_feasibility at the optimum", "[fo]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 0.5);
  const double tau_s = 50.0;
  const FoMaxResult r = fo_max_tau_r(f, 0.1, tau_s);
  REQUIRE(r.status == MaxTauRStatus::Ok);
  REQUIRE(r.tau_r > 0.0);
  const auto grid = default_omega_grid(f);
  {
    const LossParams at(VectorXd::Constant(1, 0.1), tau_s, r.tau_r * 0.999);
    const FoMargins m = fo_feasibility(f, at, r.z.z12, r.z.z21, r.z.z22, grid, 1e-6);
    REQUIRE(m.feasible);
  }
  {
    const LossParams beyond(VectorXd::Constant(1, 0.1), tau_s, r.tau_r * 1.01);
    const FoMargins m = fo_feasibility(f, beyond, r.z.z12, r.z.z21, r.z.z22, grid, 1e-6);
    REQUIRE_FALSE(m.feasible);  // the initial-value bound is active at tau_r*
  }
}

TEST_CASE("fo_max_tau_r: mu = 1 agrees with the rational-embedding pipeline",
          "[fo][oracle]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 1.0);
  const LtiAdmittance sys = rational_embedding(f);
  // embedding reproduces the transfer function
  for (double w : {0.0, 0.3, 1.0, 5.0}) {
    const Complex yr = eval_tf_lti(sys, Complex(0.0, w))(0, 0);
    const Complex yf = eval_tf_fo(f, Complex(0.0, w));
    REQUIRE(std::abs(yr - yf) < 1e-12);
  }
  for (double tau_s : {2.0, 20.0}) {
    const FoMaxResult fo = fo_max_tau_r(f, 0.1, tau_s);
    const MaxTauRResult lti =
        max_tau_r(sys, VectorXd::Constant(1, 0.1), tau_s, {}, 1e-4);
    REQUIRE(fo.status == MaxTauRStatus::Ok);
    REQUIRE(lti.status == MaxTauRStatus::Ok);
    REQUIRE(fo.tau_r == Approx(lti.tau_r).epsilon(0.05));
  }
}

TEST_CASE("fo_max_tau_r: rectangular regions across the admissible tau_s grid",
          "[fo][paper]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 1.0);
  double lo = kInf, hi = 0.0;
  for (double tau_s : {1.5 / f.omega_h, 3.0 / f.omega_h, 30.0 / f.omega_h, 1e4}) {
    const FoMaxResult r = fo_max_tau_r(f, 0.1, tau_s);
    REQUIRE(r.status == MaxTauRStatus::Ok);
    lo = std::min(lo, r.tau_r);
    hi = std::max(hi, r.tau_r);
  }
  REQUIRE((hi - lo) / hi < 0.05);
}

TEST_CASE("fo infeasible: lag orders and over-resistive ports", "[fo]") {
  // R z11 >= 1 leaves no room in the Z condition
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 1.0);  // z11 = sqrt(3)
  const FoMaxResult r = fo_max_tau_r(f, 1.0, 100.0);
  REQUIRE(r.status == MaxTauRStatus::InfeasibleAtZero);
}

TEST_CASE("backbone: paper mu range emits a monotone-trend curve", "[fo][paper]") {
  std::vector<double> mu_grid;
  for (int i = 0; i < 8; ++i) mu_grid.push_back(0.354 + (1.0 - 0.354) * i / 7.0);
  const auto pts = backbone(mu_grid, 30.0, 1.0, 1.0, 0.1, 50.0);
  REQUIRE(pts.size() == mu_grid.size());
  REQUIRE(pts.back().mu == Approx(1.0));  // mu = 1 endpoint present
  int feasible = 0;
  for (const auto& pt : pts) feasible += pt.feasible ? 1 : 0;
  REQUIRE(feasible == static_cast<int>(pts.size()));
  for (const auto& pt : pts) {
    REQUIRE(pt.tau_r_max > 0.0);
    REQUIRE(pt.tau_s_inv_max > 0.0);
    REQUIRE(pt.tau_s_inv_max <= pt.filter.omega_h * (1.0 + 1e-9));
  }
}

TEST_CASE("backbone: empty grid gives an empty curve", "[fo]") {
  REQUIRE(backbone({}, 30.0, 1.0, 1.0, 0.1, 50.0).empty());
}

TEST_CASE("fo grid refinement stability", "[fo][property]") {
  const FoLeadLag f = design_from_specs(30.0, 1.0, 1.0, 0.5);
  const LossParams loss(VectorXd::Constant(1, 0.1), 50.0, 0.05);
  const FoMargins coarse =
      fo_feasibility(f, loss, 0.6, 0.8, 0.5, default_omega_grid(f, 4096));
  const FoMargins fine =
      fo_feasibility(f, loss, 0.6, 0.8, 0.5, default_omega_grid(f, 8192));
  const double scale = std::max(std::abs(coarse.freq_worst), 1e-12);
  REQUIRE(std::abs(fine.freq_worst - coarse.freq_worst) < 0.01 * scale);
}
