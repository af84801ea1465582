#pragma once

#include "spsa/types.hpp"

namespace spsa {

struct HinfResult {
  bool stable = false;        // state matrix Hurwitz
  double norm = 0.0;          // H-inf norm, valid when stable
  double unstable_real = 0.0; // max Re(eig(A)) when !stable
  double grid_estimate = 0.0; // pre-bisection frequency-grid supremum
};

/// H-infinity norm of G(s) = C (sI - A)^-1 B + D for Hurwitz A, via
/// imaginary-axis Hamiltonian eigenvalue bisection. Bracket: lower bound
/// max(sigma_max(D), grid estimate over 2048 log-spaced frequencies), upper
/// bound 10x the grid estimate; purely-imaginary test with 1e-8 absolute
/// tolerance on real parts. For n = 0 returns sigma_max(D).
HinfResult hinf_norm(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                     const MatrixXd& D, double rel_tol = 1e-6);

/// sup over a log-spaced frequency grid of sigma_max(G(j w)); includes w = 0.
/// Exposed for oracle-style cross checks.
double freq_grid_sup(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                     const MatrixXd& D, int points, double w_lo, double w_hi);

}  // namespace spsa
