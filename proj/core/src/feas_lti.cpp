#include "spsa/feas_lti.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "spsa/errors.hpp"

namespace spsa {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::TauRZero: return "tau_r_zero";
    case Regime::TauRInfinite: return "tau_r_infinite";
    default: return "generic";
  }
}

Regime regime_of(const LossParams& loss) {
  if (loss.tau_r == 0.0) return Regime::TauRZero;
  if (loss.tau_r == kInf) return Regime::TauRInfinite;
  return Regime::Generic;
}

namespace {

void check_ports(const LtiAdmittance& sys, const LossParams& loss) {
  sys.validate();
  loss.validate();
  if (sys.ports() != loss.ports())
    throw DimensionMismatch("system has " + std::to_string(sys.ports()) +
                            " ports but R has " + std::to_string(loss.ports()));
}

// [[-R^-1, 2D^T - R^-1], [*, -R^-1]] — the static feasibility block, which is
// also what the main inequality collapses to when n = 0.
MatrixXd static_block(const MatrixXd& D, const LossParams& loss) {
  const int np = static_cast<int>(D.rows());
  const MatrixXd Rinv = loss.R_inv();
  SymBlockMatrix M({{"v", np}, {"w", np}});
  M.set("v", "v", -Rinv);
  M.set("v", "w", 2.0 * D.transpose() - Rinv);
  M.set("w", "w", -Rinv);
  return M.dense();
}

}  // namespace

LmiProblem assemble_sufficient(const LtiAdmittance& sys, const LossParams& loss, double tol) {
  check_ports(sys, loss);
  const int n = sys.n();
  const int np = sys.ports();
  const Regime regime = regime_of(loss);

  LmiProblem p;
  if (n == 0) {
    const MatrixXd S = static_block(sys.D, loss);
    p.add_constraint("static", ConstraintSense::NegSemidef, {},
                     [S](const VarValues&) { return S; });
    p.finalize();
    return p;
  }
  if (regime == Regime::TauRInfinite)
    throw UnsupportedRegime(
        "tau_r = inf requires a static admittance (n = 0): a minimal realization of a "
        "feasible Y has no dynamics; supply the static gain directly");

  const int vP = p.add_symmetric("P", n);
  const int vX = p.add_matrix("X", n, n);
  const MatrixXd A = sys.A, B = sys.B, C = sys.C, D = sys.D;
  const MatrixXd Rinv = loss.R_inv();
  const double leak = loss.leak_rate();  // 2/tau_s

  p.add_constraint("lyapunov", ConstraintSense::NegSemidef, {vP, vX},
                   [A, leak](const VarValues& v) -> MatrixXd {
                     const MatrixXd& P = v[0];
                     const MatrixXd& X = v[1];
                     return A.transpose() * P + P * A + leak * P + X + X.transpose();
                   });

  if (regime == Regime::TauRZero) {
    p.add_constraint("main", ConstraintSense::NegSemidef, {vP, vX},
                     [A, B, C, D, Rinv, n, np](const VarValues& v) -> MatrixXd {
                       const MatrixXd& P = v[0];
                       const MatrixXd& X = v[1];
                       SymBlockMatrix M({{"x", n}, {"v", np}, {"w", np}});
                       M.set("x", "x", -2.0 * (X + X.transpose()));
                       M.set("x", "v", 2.0 * P * B);
                       M.set("x", "w", 2.0 * C.transpose());
                       M.set("v", "v", -Rinv);
                       M.set("v", "w", 2.0 * D.transpose() - Rinv);
                       M.set("w", "w", -Rinv);
                       return M.dense();
                     });
  } else {
    const double itr = 1.0 / loss.tau_r;
    p.add_constraint("main", ConstraintSense::NegSemidef, {vP, vX},
                     [A, B, C, D, Rinv, itr, n, np](const VarValues& v) -> MatrixXd {
                       const MatrixXd& P = v[0];
                       const MatrixXd& X = v[1];
                       SymBlockMatrix M({{"x", n}, {"v", np}, {"w", np}, {"z", n}});
                       M.set("x", "x", -2.0 * (X + X.transpose()));
                       M.set("x", "v", 2.0 * P * B);
                       M.set("x", "w", 2.0 * C.transpose());
                       M.set("x", "z", -2.0 * X.transpose());
                       M.set("v", "v", -Rinv);
                       M.set("v", "w", 2.0 * D.transpose() - Rinv);
                       M.set("v", "z", 2.0 * B.transpose() * P);
                       M.set("w", "w", -Rinv);
                       M.set("w", "z", MatrixXd::Zero(np, n));
                       M.set("z", "z", -itr * P);
                       return M.dense();
                     });
  }

  p.add_constraint("P_pos", ConstraintSense::PosDef, {vP},
                   [](const VarValues& v) { return v[0]; }, strictness_eps(tol, n));
  p.finalize();
  return p;
}

HinfCheck check_necessary_hinf(const LtiAdmittance& sys, const LossParams& loss, double tol) {
  check_ports(sys, loss);
  const int n = sys.n();
  const int np = sys.ports();
  const MatrixXd Rh = loss.R_sqrt();

  HinfCheck out;
  MatrixXd As = sys.A;
  if (!loss.leakless()) As.diagonal().array() += 1.0 / loss.tau_s;

  if (n > 0) {
    Eigen::EigenSolver<MatrixXd> es(As, false);
    double max_re = -kInf;
    for (int i = 0; i < n; ++i) max_re = std::max(max_re, es.eigenvalues()[i].real());
    if (max_re >= 0.0) {
      out.shifted_stable = false;
      out.unstable_real = max_re;
      out.pass = false;  // Ytilde not in H-inf
      return out;
    }
  }
  out.shifted_stable = true;

  const MatrixXd Bs = sys.B * Rh;
  const MatrixXd Cs = -2.0 * Rh * sys.C;
  const MatrixXd Ds = MatrixXd::Identity(np, np) - 2.0 * Rh * sys.D * Rh;
  const HinfResult hn = hinf_norm(As, Bs, Cs, Ds);
  out.norm = hn.norm;
  out.pass = hn.norm <= 1.0 + tol;
  return out;
}

SolveResult check_necessary_lmi(const LtiAdmittance& sys, const LossParams& loss, double tol) {
  check_ports(sys, loss);
  const int n = sys.n();
  const int np = sys.ports();

  LmiProblem p;
  if (n == 0) {
    const MatrixXd S = static_block(sys.D, loss);
    p.add_constraint("necessary", ConstraintSense::NegSemidef, {},
                     [S](const VarValues&) { return S; });
    return solve_feasibility(p, tol);
  }

  const int vP = p.add_symmetric("P", n);
  const MatrixXd A = sys.A, B = sys.B, C = sys.C, D = sys.D;
  const MatrixXd Rinv = loss.R_inv();
  const double leak2 = 2.0 * loss.leak_rate();  // 4/tau_s

  p.add_constraint("necessary", ConstraintSense::NegSemidef, {vP},
                   [A, B, C, D, Rinv, leak2, n, np](const VarValues& v) -> MatrixXd {
                     const MatrixXd& P = v[0];
                     SymBlockMatrix M({{"x", n}, {"v", np}, {"w", np}});
                     M.set("x", "x",
                           2.0 * A.transpose() * P + 2.0 * P * A + leak2 * P);
                     M.set("x", "v", 2.0 * P * B);
                     M.set("x", "w", 2.0 * C.transpose());
                     M.set("v", "v", -Rinv);
                     M.set("v", "w", 2.0 * D.transpose() - Rinv);
                     M.set("w", "w", -Rinv);
                     return M.dense();
                   });
  p.add_constraint("P_pos", ConstraintSense::PosDef, {vP},
                   [](const VarValues& v) { return v[0]; }, strictness_eps(tol, n));
  return solve_feasibility(p, tol);
}

Theorem4Report check_theorem4_equivalence(const LtiAdmittance& sys, const LossParams& loss,
                                          double tol) {
  if (loss.tau_r != 0.0)
    throw InvalidParameter("check_theorem4_equivalence: requires tau_r = 0");
  Theorem4Report rep;
  LmiProblem suff = assemble_sufficient(sys, loss, tol);
  rep.sufficient = solve_feasibility(suff, tol);
  rep.necessary = check_necessary_lmi(sys, loss, tol);
  rep.both_decided = rep.sufficient.status != FeasStatus::Indeterminate &&
                     rep.necessary.status != FeasStatus::Indeterminate;
  rep.agree = !rep.both_decided || rep.sufficient.status == rep.necessary.status;
  if (!rep.agree)
    throw EquivalenceViolation(
        std::string("tau_r = 0: sufficiency is ") + to_string(rep.sufficient.status) +
        " but necessity is " + to_string(rep.necessary.status) +
        " (margins " + std::to_string(rep.sufficient.margin) + ", " +
        std::to_string(rep.necessary.margin) + ")");
  return rep;
}

FeasVerdict analyze(const LtiAdmittance& sys, const LossParams& loss, double tol) {
  FeasVerdict verdict;
  verdict.regime = regime_of(loss);
  LmiProblem suff = assemble_sufficient(sys, loss, tol);
  verdict.sufficient = solve_feasibility(suff, tol);
  verdict.necessary = check_necessary_hinf(sys, loss, tol);
  verdict.necessary_lmi = check_necessary_lmi(sys, loss, tol);

  if (verdict.sufficient.status == FeasStatus::Feasible) {
    const double band = std::max(100.0 * tol, 1e-5);
    if (!verdict.necessary.shifted_stable || verdict.necessary.norm > 1.0 + band)
      throw EquivalenceViolation(
          "sufficiency certified Feasible but the necessary H-inf condition failed "
          "(norm " + std::to_string(verdict.necessary.norm) + ")");
    if (verdict.necessary_lmi.status == FeasStatus::Infeasible)
      throw EquivalenceViolation(
          "sufficiency certified Feasible but the necessary LMI is Infeasible");
  }
  return verdict;
}

}  // namespace spsa
