#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <complex>

#include "spsa/errors.hpp"
#include "spsa/json_io.hpp"
#include "spsa/model.hpp"
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

// independent evaluation through the eigendecomposition of A
MatrixXcd partial_fraction_eval(const LtiAdmittance& sys, Complex s) {
  Eigen::EigenSolver<MatrixXd> es(sys.A);
  const MatrixXcd V = es.eigenvectors();
  const Eigen::VectorXcd lam = es.eigenvalues();
  const MatrixXcd Binv = V.partialPivLu().solve(sys.B.cast<Complex>());
  MatrixXcd acc = sys.D.cast<Complex>();
  const MatrixXcd CV = sys.C.cast<Complex>() * V;
  for (int i = 0; i < lam.size(); ++i)
    acc += (CV.col(i) * Binv.row(i)) / (s - lam[i]);
  return acc;
}

}  // namespace

TEST_CASE("eval_tf_lti: DC gain of 1/(s+1)", "[model]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 0.0);
  const MatrixXcd Y = eval_tf_lti(sys, Complex(0.0, 0.0));
  REQUIRE(Y(0, 0).real() == Approx(1.0).margin(1e-14));
  REQUIRE(Y(0, 0).imag() == Approx(0.0).margin(1e-14));
}

TEST_CASE("eval_tf_lti: static case returns D", "[model]") {
  MatrixXd D(1, 1);
  D << 0.5;
  const auto sys = LtiAdmittance::static_gain(D);
  for (double w : {0.0, 1.0, 37.5}) {
    const MatrixXcd Y = eval_tf_lti(sys, Complex(0.3, w));
    REQUIRE(Y(0, 0) == Complex(0.5, 0.0));
  }
}

TEST_CASE("eval_tf_lti: singular resolvent at an eigenvalue of A", "[model]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 0.0);
  REQUIRE_THROWS_AS(eval_tf_lti(sys, Complex(-1.0, 0.0)), SingularResolvent);
  REQUIRE_THROWS_AS(eval_tf_lti(sys, Complex(-1.0 + 1e-14, 0.0)), SingularResolvent);
}

TEST_CASE("eval_tf_lti: building system matches the partial-fraction oracle", "[model]") {
  const auto sys = std::get<LtiAdmittance>(
      load_system_json(std::string(SPSA_DATA_DIR) + "/building.json"));
  REQUIRE(sys.n() == 8);
  REQUIRE(sys.ports() == 2);
  const Complex s(0.0, 40.639);
  const MatrixXcd Y = eval_tf_lti(sys, s);
  const MatrixXcd Yo = partial_fraction_eval(sys, s);
  REQUIRE((Y - Yo).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("eval_tf_lti: conjugate frequencies give conjugate values", "[model][property]") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + rng.index(5);
    const int np = 1 + rng.index(2);
    LtiAdmittance sys(test::random_stable_A(rng, n), test::random_matrix(rng, n, np),
                      test::random_matrix(rng, np, n), test::random_matrix(rng, np, np));
    const double w = rng.uniform(0.01, 20.0);
    const MatrixXcd Yp = eval_tf_lti(sys, Complex(0.0, w));
    const MatrixXcd Ym = eval_tf_lti(sys, Complex(0.0, -w));
    REQUIRE((Yp.conjugate() - Ym).cwiseAbs().maxCoeff() < 1e-12 * (1 + Yp.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("eval_tf_fo: unity DC gain and zeroth power", "[model]") {
  REQUIRE(eval_tf_fo(FoLeadLag(1.0, 1.0, 4.0, 1.0), Complex(0, 0)).real() == Approx(1.0));
  const FoLeadLag f0(2.5, 1.0, 4.0, 0.0);
  REQUIRE(eval_tf_fo(f0, Complex(0.7, 12.0)) == Complex(2.5, 0.0));
}

TEST_CASE("eval_tf_fo: principal-branch half power", "[model]") {
  const FoLeadLag f(1.0, 0.5, 2.0, 0.5);
  const Complex got = eval_tf_fo(f, Complex(0.0, 1.0));
  const Complex want = std::exp(0.5 * std::log(Complex(1.0, 2.0) / Complex(1.0, 0.5)));
  REQUIRE(std::abs(got - want) < 1e-12);
}

TEST_CASE("eval_tf_fo: branch point guard", "[model]") {
  const FoLeadLag f(1.0, 1.0, 4.0, 0.5);
  REQUIRE_THROWS_AS(eval_tf_fo(f, Complex(-4.0, 0.0)), BranchPoint);
}

TEST_CASE("eval_tf_fo: integer orders match the rational evaluation", "[model][property]") {
  Rng rng(123);
  for (int mu_i : {1, 2, 3}) {
    const FoLeadLag f(1.7, 0.8, 5.0, double(mu_i));
    for (int trial = 0; trial < 25; ++trial) {
      const Complex s(rng.uniform(-0.5, 3.0), rng.uniform(-30.0, 30.0));
      if (std::abs(s + f.omega_h) < 1e-3) continue;
      const Complex base = (1.0 + s / f.omega_L) / (1.0 + s / f.omega_h);
      if (base.real() < 0 && std::abs(base.imag()) < 1e-9) continue;  // on the cut
      Complex rational(1.0, 0.0);
      for (int k = 0; k < mu_i; ++k) rational *= base;
      rational *= f.k_p;
      const Complex got = eval_tf_fo(f, s);
      REQUIRE(std::abs(got - rational) <= 1e-12 * std::abs(rational));
    }
  }
}

TEST_CASE("shift_frequency: scalar examples and tau_s = inf identity", "[model]") {
  const auto sys = scalar_sys(-1.0, 1.0, 1.0, 0.0);  // 1/(s+1)
  REQUIRE(shift_frequency(sys, kInf, 0.0)(0, 0).real() == Approx(1.0));
  REQUIRE(shift_frequency(sys, 2.0, 0.0)(0, 0).real() == Approx(2.0));

  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const double w = rng.uniform(0.0, 10.0);
    const MatrixXcd a = shift_frequency(sys, kInf, w);
    const MatrixXcd b = eval_tf_lti(sys, Complex(0.0, w));
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("shift_frequency: shifted branch point reachable when omega_h tau_s = 1",
          "[model]") {
  const FoLeadLag f(1.0, 1.0, 4.0, 0.5);
  const double tau_s = 1.0 / f.omega_h;  // shifted branch point lands at s = 0
  REQUIRE_THROWS_AS(shift_frequency(f, tau_s, 0.0), BranchPoint);
}
