#pragma once

#include "spsa/hinf.hpp"
#include "spsa/lmi.hpp"
#include "spsa/types.hpp"

namespace spsa {

enum class Regime { Generic, TauRZero, TauRInfinite };

const char* to_string(Regime r);
Regime regime_of(const LossParams& loss);

/// Sufficiency LMIs in P = P^T > 0 (n x n) and full X (n x n):
///   A^T P + P A + (2/tau_s) P + X + X^T <= 0
///   [ -2(X+X^T)  2PB       2C^T         -2X^T     ]
///   [  *         -R^-1     2D^T - R^-1   2B^T P   ]
///   [  *          *        -R^-1         0        ]   <= 0
///   [  *          *         *           -(1/tau_r)P]
/// tau_r = 0 drops the fourth block row/column; n = 0 reduces to the static
/// condition [[-R^-1, 2D^T-R^-1],[*, -R^-1]] <= 0 with no variables.
/// Strictness P >= eps I uses eps = tol * n.
/// Throws UnsupportedRegime for tau_r = inf with n >= 1 (a minimal realization
/// would have to be static; no automatic minimalization is attempted).
LmiProblem assemble_sufficient(const LtiAdmittance& sys, const LossParams& loss,
                               double tol = 1e-7);

struct HinfCheck {
  bool pass = false;
  bool shifted_stable = false;
  double norm = 0.0;           // ||2 R^1/2 Ytilde R^1/2 - I||_Hinf when stable
  double unstable_real = 0.0;  // witness max Re eig(A + I/tau_s) when unstable
};

/// Necessary condition (scaled small-gain form): the H-inf norm of the system
/// (A + I/tau_s, B R^1/2, -2 R^1/2 C, I - 2 R^1/2 D R^1/2) must be <= 1.
/// Fails with the witness eigenvalue when A + I/tau_s is not Hurwitz.
HinfCheck check_necessary_hinf(const LtiAdmittance& sys, const LossParams& loss,
                               double tol = 1e-7);

/// Necessary condition as an LMI in P = P^T > 0:
///   [ 2A^TP + 2PA + 4/tau_s P   2PB      2C^T        ]
///   [  *                        -R^-1    2D^T - R^-1 ]  <= 0
///   [  *                         *       -R^-1       ]
SolveResult check_necessary_lmi(const LtiAdmittance& sys, const LossParams& loss,
                                double tol = 1e-7);

struct Theorem4Report {
  SolveResult sufficient;
  SolveResult necessary;
  bool agree = false;       // identical verdicts, or one side in the band
  bool both_decided = false;
};

/// At tau_r = 0 sufficiency and necessity coincide; disagreement outside the
/// Indeterminate band throws EquivalenceViolation.
Theorem4Report check_theorem4_equivalence(const LtiAdmittance& sys, const LossParams& loss,
                                          double tol = 1e-7);

struct FeasVerdict {
  SolveResult sufficient;
  HinfCheck necessary;
  SolveResult necessary_lmi;
  Regime regime = Regime::Generic;
};

/// Runs the sufficiency LMIs plus both necessary checks. Enforces the
/// invariant sufficient-Feasible => necessary-pass (EquivalenceViolation
/// otherwise, since Lemma-level necessity bounds the larger feasible set).
FeasVerdict analyze(const LtiAdmittance& sys, const LossParams& loss, double tol = 1e-7);

}  // namespace spsa
