#pragma once

#include "spsa/feas_lti.hpp"
#include "spsa/lmi.hpp"
#include "spsa/types.hpp"

namespace spsa {

enum class FdScheme { CentralWithOneSidedEnds };

/// Per-node certificate for the time-gridded program.
struct LtvCertificate {
  std::vector<MatrixXd> P;  // symmetric n x n per node
  std::vector<MatrixXd> X;  // n x n per node
  std::vector<double> margin_lyapunov;  // true-scale worst eigenvalue per node
  std::vector<double> margin_main;
  double margin = 0.0;  // normalized overall margin
  int samples = 0;
  double dt = 0.0;
};

/// One pair of block constraints per grid node, with dP/dt replaced by a
/// finite-difference stencil over {P_{k-1}, P_k, P_{k+1}}: central differences
/// at interior nodes, first-order one-sided at both ends. Decision variables
/// are all P_k (>= eps I) and X_k. Throws GridTooCoarse when
/// dt > 0.1 / max_k ||A_k||_2.
LmiProblem assemble_ltv(const LtvAdmittanceGrid& sys, const LossParams& loss,
                        FdScheme scheme = FdScheme::CentralWithOneSidedEnds,
                        double tol = 1e-7);

struct LtvVerdict {
  SolveResult result;            // verdict for the discretized surrogate
  LtvCertificate certificate;
  bool discretized = true;       // the verdict is about the time-gridded problem
};

/// assemble_ltv + solve_feasibility. For constant-in-time data the returned
/// certificate is polished toward the node-averaged constant candidate when
/// that does not reduce the verified margin.
LtvVerdict check_ltv(const LtvAdmittanceGrid& sys, const LossParams& loss,
                     double tol = 1e-7);

/// Margins of a given per-node certificate, recomputed by assembly +
/// eigenvalues only (used for locality and monotonicity checks).
LtvCertificate evaluate_ltv_certificate(const LtvAdmittanceGrid& sys, const LossParams& loss,
                                        const std::vector<MatrixXd>& P,
                                        const std::vector<MatrixXd>& X, double tol = 1e-7);

}  // namespace spsa
