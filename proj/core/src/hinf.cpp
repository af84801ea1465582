#include "spsa/hinf.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "spsa/errors.hpp"

namespace spsa {

namespace {

double sigma_max(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return M.jacobiSvd().singularValues()(0);
}

double sigma_max_c(const MatrixXcd& M) {
  if (M.size() == 0) return 0.0;
  return M.jacobiSvd().singularValues()(0);
}

MatrixXcd tf(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
             const MatrixXd& D, Complex s) {
  if (A.rows() == 0) return D.cast<Complex>();
  MatrixXcd M = -A.cast<Complex>();
  M.diagonal().array() += s;
  return C.cast<Complex>() * M.partialPivLu().solve(B.cast<Complex>()) + D.cast<Complex>();
}

// True iff the Hamiltonian for level gamma has an eigenvalue on the
// imaginary axis, i.e. sigma_max(G(jw)) = gamma at some finite w.
bool has_imaginary_crossing(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                            const MatrixXd& D, double gamma) {
  const int n = static_cast<int>(A.rows());
  const int np = static_cast<int>(D.cols());
  MatrixXd R = D.transpose() * D;
  R.diagonal().array() -= gamma * gamma;  // D^T D - g^2 I  (negative definite)
  MatrixXd S = D * D.transpose();
  S.diagonal().array() -= gamma * gamma;
  const MatrixXd Rinv = R.inverse();
  const MatrixXd Sinv = S.inverse();
  const MatrixXd Ae = A - B * Rinv * D.transpose() * C;

  MatrixXd H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Ae;
  H.topRightCorner(n, n) = -gamma * B * Rinv * B.transpose();
  H.bottomLeftCorner(n, n) = gamma * C.transpose() * Sinv * C;
  H.bottomRightCorner(n, n) = -Ae.transpose();
  (void)np;

  Eigen::EigenSolver<MatrixXd> es(H, /*computeEigenvectors=*/false);
  for (int i = 0; i < 2 * n; ++i) {
    if (std::abs(es.eigenvalues()[i].real()) <= 1e-8) return true;
  }
  return false;
}

}  // namespace

double freq_grid_sup(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                     const MatrixXd& D, int points, double w_lo, double w_hi) {
  double best = sigma_max_c(tf(A, B, C, D, Complex(0.0, 0.0)));
  if (points < 2 || !(w_hi > w_lo) || !(w_lo > 0.0))
    throw InvalidParameter("freq_grid_sup: bad grid spec");
  const double step = std::log(w_hi / w_lo) / double(points - 1);
  for (int i = 0; i < points; ++i) {
    const double w = w_lo * std::exp(step * i);
    best = std::max(best, sigma_max_c(tf(A, B, C, D, Complex(0.0, w))));
  }
  return best;
}

HinfResult hinf_norm(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C,
                     const MatrixXd& D, double rel_tol) {
  HinfResult res;
  const int n = static_cast<int>(A.rows());
  if (n == 0) {
    res.stable = true;
    res.norm = sigma_max(D);
    res.grid_estimate = res.norm;
    return res;
  }

  Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
  double max_re = -kInf;
  double wmin = kInf, wmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const Complex l = es.eigenvalues()[i];
    max_re = std::max(max_re, l.real());
    const double m = std::abs(l);
    if (m > 0.0) {
      wmin = std::min(wmin, m);
      wmax = std::max(wmax, m);
    }
  }
  if (max_re >= 0.0) {
    res.stable = false;
    res.unstable_real = max_re;
    return res;
  }
  res.stable = true;
  if (!(wmax > 0.0)) {
    wmin = 1.0;
    wmax = 1.0;
  }

  const double sD = sigma_max(D);
  const double gsup = freq_grid_sup(A, B, C, D, 2048, 1e-3 * wmin, 1e3 * wmax);
  res.grid_estimate = gsup;

  double lo = std::max(sD, gsup);
  double hi = 10.0 * std::max(gsup, std::max(sD, 1e-12));
  if (lo <= 0.0) {  // identically zero transfer function
    res.norm = 0.0;
    return res;
  }
  // ensure the bracket's upper end has no crossing
  int guard = 0;
  while (hi > sD && has_imaginary_crossing(A, B, C, D, hi) && guard++ < 60) hi *= 10.0;

  // bisection; levels <= sigma_max(D) are never tested (R would be singular)
  for (int it = 0; it < 200 && (hi - lo) > rel_tol * std::max(lo, 1e-300); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= sD * (1.0 + 1e-14)) {
      lo = mid;
      continue;
    }
    if (has_imaginary_crossing(A, B, C, D, mid))
      lo = mid;
    else
      hi = mid;
  }
  res.norm = 0.5 * (lo + hi);
  return res;
}

}  // namespace spsa
