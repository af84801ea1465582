#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "spsa/errors.hpp"
#include "spsa/json_io.hpp"
#include "spsa/pareto.hpp"
#include "test_util.hpp"

using namespace spsa;
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

const LtiAdmittance& building() {
  static const LtiAdmittance sys = std::get<LtiAdmittance>(
      load_system_json(std::string(SPSA_DATA_DIR) + "/building.json"));
  return sys;
}

}  // namespace

TEST_CASE("max_tau_r: paper design point lies inside the feasible region",
          "[pareto][paper]") {
  const MaxTauRResult r = max_tau_r(building(), VectorXd::Constant(2, 1.0), 10.0);
  REQUIRE(r.status == MaxTauRStatus::Ok);
  REQUIRE(r.tau_r >= 0.075);
  REQUIRE(r.tau_r < 1.0);  // and the bound is not vacuous
}

TEST_CASE("max_tau_r: bisection correctness at the returned point", "[pareto]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 1.0);
  const VectorXd R = VectorXd::Constant(1, 0.1);
  const double tol_rel = 1e-3;
  const MaxTauRResult r = max_tau_r(sys, R, kInf, {}, tol_rel);
  REQUIRE(r.status == MaxTauRStatus::Ok);

  LmiProblem below = assemble_sufficient(sys, LossParams(R, kInf, r.tau_r * (1 - tol_rel)));
  REQUIRE(solve_feasibility(below, 1e-7).status == FeasStatus::Feasible);
  LmiProblem above = assemble_sufficient(sys, LossParams(R, kInf, r.tau_r * (1 + 2 * tol_rel)));
  REQUIRE(solve_feasibility(above, 1e-7).status != FeasStatus::Feasible);
}

TEST_CASE("max_tau_r: static admittance is tau_r independent", "[pareto]") {
  MatrixXd D(1, 1);
  D << 0.5;
  const auto sys = LtiAdmittance::static_gain(D);
  const MaxTauRResult r = max_tau_r(sys, VectorXd::Constant(1, 1.0), 10.0);
  REQUIRE(r.status == MaxTauRStatus::AtBracketBound);
  REQUIRE(r.tau_r == Approx(1e6));  // reported as ">= bound"
}

TEST_CASE("max_tau_r: infeasible at zero", "[pareto]") {
  const auto sys = scalar_sys(-1.0, 1.0, -1.0, 0.0);  // Y = -1/(s+1)
  const MaxTauRResult r = max_tau_r(sys, VectorXd::Constant(1, 1.0), 10.0);
  REQUIRE(r.status == MaxTauRStatus::InfeasibleAtZero);
}

TEST_CASE("max_tau_r: parameter validation", "[pareto]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 1.0);
  REQUIRE_THROWS_AS(max_tau_r(sys, VectorXd::Constant(1, 1.0), 10.0, {}, 0.5),
                    InvalidParameter);
}

TEST_CASE("sweep: single point equals max_tau_r; deterministic under threads",
          "[pareto]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 1.0);
  const VectorXd R = VectorXd::Constant(1, 1.0);
  const MaxTauRResult single = max_tau_r(sys, 0.2 * R, 10.0);
  const ParetoFront f1 = sweep(sys, R, {0.2}, {10.0}, {}, 1e-3, 1e-7, 1);
  REQUIRE(f1.points.size() == 1);
  REQUIRE(f1.points[0].status == single.status);
  REQUIRE(f1.points[0].tau_r_max == Approx(single.tau_r));

  const ParetoFront fa = sweep(sys, R, {0.2, 0.5, 1.0}, {5.0, 10.0, kInf}, {}, 1e-3, 1e-7, 1);
  const ParetoFront fb = sweep(sys, R, {0.2, 0.5, 1.0}, {5.0, 10.0, kInf}, {}, 1e-3, 1e-7, 4);
  REQUIRE(fa.points.size() == fb.points.size());
  for (size_t i = 0; i < fa.points.size(); ++i) {
    REQUIRE(fa.points[i].tau_r_max == fb.points[i].tau_r_max);
    REQUIRE(fa.points[i].status == fb.points[i].status);
  }
}

TEST_CASE("sweep: all-infeasible system yields marker points", "[pareto]") {
  const auto sys = scalar_sys(-1.0, 1.0, -1.0, 0.0);
  const ParetoFront f =
      sweep(sys, VectorXd::Constant(1, 1.0), {0.5, 1.0}, {10.0, kInf}, {}, 1e-3, 1e-7, 2);
  for (const auto& pt : f.points) {
    REQUIRE(pt.error.empty());
    REQUIRE(pt.status == MaxTauRStatus::InfeasibleAtZero);
  }
}

TEST_CASE("sweep: grid monotonicity along both axes", "[pareto][property]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 1.0);
  const VectorXd R = VectorXd::Constant(1, 1.0);
  const std::vector<double> r_scales = {0.05, 0.2, 0.8};
  const std::vector<double> tau_s = {2.0, 8.0, 32.0};  // tau_s^-1 decreasing
  const ParetoFront f = sweep(sys, R, r_scales, tau_s, {}, 1e-3, 1e-7, 2);
  const double band = 2e-3;
  // along increasing tau_s (decreasing tau_s^-1) max tau_r is non-decreasing
  for (size_t ir = 0; ir < r_scales.size(); ++ir)
    for (size_t is = 0; is + 1 < tau_s.size(); ++is) {
      const auto& a = f.at(ir, is);
      const auto& b = f.at(ir, is + 1);
      if (a.status == MaxTauRStatus::Ok && b.status == MaxTauRStatus::Ok)
        REQUIRE(b.tau_r_max >= a.tau_r_max * (1.0 - band));
    }
  // along decreasing R max tau_r is non-decreasing
  for (size_t is = 0; is < tau_s.size(); ++is)
    for (size_t ir = 0; ir + 1 < r_scales.size(); ++ir) {
      const auto& small_r = f.at(ir, is);
      const auto& big_r = f.at(ir + 1, is);
      if (small_r.status == MaxTauRStatus::Ok && big_r.status == MaxTauRStatus::Ok)
        REQUIRE(small_r.tau_r_max >= big_r.tau_r_max * (1.0 - band));
    }
}

TEST_CASE("pareto csv and svg artifacts", "[pareto]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 1.0);
  const ParetoFront f = sweep(sys, VectorXd::Constant(1, 1.0), {0.2, 1.0},
                              {5.0, 20.0}, {}, 1e-3, 1e-7, 2);
  const std::string csv = std::filesystem::temp_directory_path() / "spsa_front.csv";
  const std::string svg = std::filesystem::temp_directory_path() / "spsa_front.svg";
  write_pareto_csv(csv, f);
  write_pareto_svg(svg, f);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "R_scale,tau_s_inv,tau_r_max,status,margin");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  REQUIRE(rows == 4);
  std::ifstream svg_in(svg);
  std::string first;
  std::getline(svg_in, first);
  REQUIRE(first.find("<svg") != std::string::npos);
  std::remove(csv.c_str());
  std::remove(svg.c_str());
}
