#include "spsa/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "spsa/errors.hpp"

namespace spsa {

MatrixXcd eval_tf_lti(const LtiAdmittance& sys, Complex s) {
  sys.validate();
  const int n = sys.n();
  if (n == 0) return sys.D.cast<Complex>();

  Eigen::EigenSolver<MatrixXd> es(sys.A, /*computeEigenvectors=*/false);
  double rho = 0.0;
  for (int i = 0; i < n; ++i) rho = std::max(rho, std::abs(es.eigenvalues()[i]));
  const double tol = 1e-12 * std::max(1.0, rho);
  for (int i = 0; i < n; ++i) {
    if (std::abs(s - es.eigenvalues()[i]) < tol)
      throw SingularResolvent("eval_tf_lti: s is an eigenvalue of A");
  }

  MatrixXcd M = -sys.A.cast<Complex>();
  M.diagonal().array() += s;
  const MatrixXcd sol = M.partialPivLu().solve(sys.B.cast<Complex>());
  return sys.C.cast<Complex>() * sol + sys.D.cast<Complex>();
}

Complex eval_tf_fo(const FoLeadLag& f, Complex s) {
  f.validate();
  if (std::abs(s + f.omega_h) < 1e-12 * f.omega_h)
    throw BranchPoint("eval_tf_fo: s at the branch point -omega_h");
  if (f.mu == 0.0) return Complex(f.k_p, 0.0);
  const Complex base = (1.0 + s / f.omega_L) / (1.0 + s / f.omega_h);
  // principal branch: base^mu = exp(mu Log base)
  return f.k_p * std::exp(f.mu * std::log(base));
}

MatrixXcd shift_frequency(const LtiAdmittance& sys, double tau_s, double omega) {
  return shift_frequency([&](Complex s) { return eval_tf_lti(sys, s); }, tau_s, omega);
}

Complex shift_frequency(const FoLeadLag& f, double tau_s, double omega) {
  return shift_frequency([&](Complex s) { return eval_tf_fo(f, s); }, tau_s, omega);
}

}  // namespace spsa
