#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spsa/errors.hpp"
#include "spsa/lmi.hpp"
#include "test_util.hpp"

using namespace spsa;
using spsa::test::Rng;
using Catch::Approx;

namespace {

// scalar Lyapunov feasibility: exists p > 0 with 2 a p <= 0
LmiProblem scalar_lyapunov(double a, double tol = 1e-7) {
  LmiProblem p;
  const int vP = p.add_symmetric("P", 1);
  p.add_constraint("lyap", ConstraintSense::NegSemidef, {vP},
                   [a](const VarValues& v) -> MatrixXd { return 2.0 * a * v[0]; });
  p.add_constraint("P_pos", ConstraintSense::PosDef, {vP},
                   [](const VarValues& v) { return v[0]; }, strictness_eps(tol, 1));
  return p;
}

// test-side oracle: cyclic Jacobi rotations, independent of Eigen's solver
double jacobi_min_eig(MatrixXd M) {
  const int n = static_cast<int>(M.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(M(i, j)));
    if (off < 1e-13 * (1.0 + M.cwiseAbs().maxCoeff())) break;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(M(i, j)) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * M(i, j), M(j, j) - M(i, i));
        const double c = std::cos(theta), s = std::sin(theta);
        MatrixXd G = MatrixXd::Identity(n, n);
        G(i, i) = c;
        G(j, j) = c;
        G(i, j) = s;
        G(j, i) = -s;
        M = G.transpose() * M * G;
      }
  }
  return M.diagonal().minCoeff();
}

}  // namespace

TEST_CASE("solve_feasibility: scalar Lyapunov", "[lmi]") {
  LmiProblem stable = scalar_lyapunov(-1.0);
  const SolveResult ok = solve_feasibility(stable, 1e-7);
  REQUIRE(ok.status == FeasStatus::Feasible);
  REQUIRE(ok.certificate.values[0](0, 0) > 0.0);

  LmiProblem unstable = scalar_lyapunov(+1.0);
  const SolveResult bad = solve_feasibility(unstable, 1e-7);
  REQUIRE(bad.status == FeasStatus::Infeasible);
}

TEST_CASE("solve_feasibility: 2x2 static block against the eigenvalue oracle", "[lmi]") {
  // [[-1/r, 2d-1/r], [2d-1/r, -1/r]] has eigenvalues -1/r +- (2d - 1/r)
  auto make = [](double d, double r) {
    LmiProblem p;
    MatrixXd F(2, 2);
    F << -1.0 / r, 2.0 * d - 1.0 / r, 2.0 * d - 1.0 / r, -1.0 / r;
    p.add_constraint("static", ConstraintSense::NegSemidef, {},
                     [F](const VarValues&) { return F; });
    return p;
  };

  {
    LmiProblem p = make(0.5, 1.0);  // eigenvalues {-1, -1}
    const SolveResult r = solve_feasibility(p, 1e-7);
    REQUIRE(r.status == FeasStatus::Feasible);
    REQUIRE(r.certificate.worst_eig[0] == Approx(-1.0).margin(1e-12));
  }
  {
    LmiProblem p = make(1.0, 1.0);  // boundary: eigenvalues {-2, 0}, margin 0
    const SolveResult r = solve_feasibility(p, 1e-7);
    REQUIRE(r.status == FeasStatus::Indeterminate);
    REQUIRE(r.certificate.worst_eig[0] == Approx(0.0).margin(1e-12));
    REQUIRE(std::abs(r.margin) < 1e-7);
  }
  {
    LmiProblem p = make(1.5, 1.0);  // eigenvalues {-3, 1}: infeasible
    const SolveResult r = solve_feasibility(p, 1e-7);
    REQUIRE(r.status == FeasStatus::Infeasible);
    REQUIRE(r.certificate.worst_eig[0] == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("min_eig: examples and the Jacobi-rotation oracle", "[lmi]") {
  REQUIRE(min_eig(MatrixXd::Identity(3, 3)) == Approx(1.0));
  MatrixXd D2(2, 2);
  D2 << 2.0, 0.0, 0.0, -5.0;
  REQUIRE(min_eig(D2) == Approx(-5.0));

  Rng rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd M = test::random_matrix(rng, 8, 8, 2.0);
    M = (0.5 * (M + M.transpose())).eval();
    const double got = min_eig(M);
    const double oracle = jacobi_min_eig(M);
    REQUIRE(got == Approx(oracle).margin(1e-8 * std::max(1.0, M.cwiseAbs().maxCoeff())));
  }
}

TEST_CASE("certificates re-verify with assembly + eigenvalues only", "[lmi]") {
  Rng rng(5);
  const MatrixXd A = test::random_stable_A(rng, 4);
  LmiProblem p;
  const int vP = p.add_symmetric("P", 4);
  p.add_constraint("lyap", ConstraintSense::NegSemidef, {vP},
                   [A](const VarValues& v) -> MatrixXd {
                     return A.transpose() * v[0] + v[0] * A;
                   });
  p.add_constraint("P_pos", ConstraintSense::PosDef, {vP},
                   [](const VarValues& v) { return v[0]; }, strictness_eps(1e-7, 4));
  const SolveResult r = solve_feasibility(p, 1e-7);
  REQUIRE(r.status == FeasStatus::Feasible);

  const VerifyReport rep = verify(p, r.certificate.values);
  REQUIRE(rep.margin == Approx(r.certificate.margin).margin(1e-12));
  for (size_t c = 0; c < rep.worst_eig.size(); ++c)
    REQUIRE(rep.worst_eig[c] == Approx(r.certificate.worst_eig[c]).margin(1e-9));
}

TEST_CASE("verdict is invariant under positive scaling of a homogeneous problem",
          "[lmi][property]") {
  Rng rng(77);
  for (double alpha : {1e-3, 1.0, 1e4}) {
    const MatrixXd A = test::random_stable_A(rng, 3);
    auto build = [&](double scale) {
      LmiProblem p;
      const int vP = p.add_symmetric("P", 3);
      p.add_constraint("lyap", ConstraintSense::NegSemidef, {vP},
                       [A, scale](const VarValues& v) -> MatrixXd {
                         return scale * (A.transpose() * v[0] + v[0] * A);
                       });
      p.add_constraint("P_pos", ConstraintSense::PosDef, {vP},
                       [scale](const VarValues& v) -> MatrixXd { return scale * v[0]; },
                       strictness_eps(1e-7, 3));
      return p;
    };
    LmiProblem p1 = build(1.0);
    LmiProblem pa = build(alpha);
    REQUIRE(solve_feasibility(p1, 1e-7).status == solve_feasibility(pa, 1e-7).status);
  }
}

TEST_CASE("determinism: identical problems give identical certificates", "[lmi]") {
  auto build = []() {
    LmiProblem p;
    MatrixXd A(2, 2);
    A << -1.0, 0.7, -0.3, -2.0;
    const int vP = p.add_symmetric("P", 2);
    p.add_constraint("lyap", ConstraintSense::NegSemidef, {vP},
                     [A](const VarValues& v) -> MatrixXd {
                       return A.transpose() * v[0] + v[0] * A;
                     });
    p.add_constraint("P_pos", ConstraintSense::PosDef, {vP},
                     [](const VarValues& v) { return v[0]; }, strictness_eps(1e-7, 2));
    return p;
  };
  LmiProblem p1 = build(), p2 = build();
  const SolveResult a = solve_feasibility(p1, 1e-7);
  const SolveResult b = solve_feasibility(p2, 1e-7);
  REQUIRE(a.status == b.status);
  REQUIRE(a.margin == b.margin);  // bit-for-bit
  REQUIRE((a.certificate.values[0] - b.certificate.values[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("preconditions: tol and constraint count", "[lmi]") {
  LmiProblem p = scalar_lyapunov(-1.0);
  REQUIRE_THROWS_AS(solve_feasibility(p, 0.0), InvalidParameter);
  LmiProblem empty;
  REQUIRE_THROWS_AS(solve_feasibility(empty, 1e-7), InvalidParameter);
}

TEST_CASE("SymBlockMatrix: block placement and symmetry enforcement", "[lmi]") {
  SymBlockMatrix M({{"a", 2}, {"b", 1}});
  MatrixXd Aa(2, 2), Ab(2, 1), Bb(1, 1);
  Aa << 1, 2, 2, 4;
  Ab << 5, 6;
  Bb << 7;
  M.set("a", "a", Aa);
  M.set("a", "b", Ab);
  M.set("b", "b", Bb);
  const MatrixXd D = M.dense();
  REQUIRE(D(0, 2) == 5.0);
  REQUIRE(D(2, 0) == 5.0);
  REQUIRE(D(2, 2) == 7.0);

  SymBlockMatrix bad({{"a", 2}});
  MatrixXd Asym(2, 2);
  Asym << 1, 2, 3, 4;  // not symmetric
  bad.set("a", "a", Asym);
  REQUIRE_THROWS_AS(bad.dense(), InvalidParameter);
  REQUIRE_THROWS_AS(M.set("a", "c", Bb), DimensionMismatch);
}
