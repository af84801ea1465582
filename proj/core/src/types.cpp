#include "spsa/types.hpp"

#include <cmath>
#include <sstream>

#include "spsa/errors.hpp"

namespace spsa {

LossParams::LossParams(VectorXd r, double taus, double taur, double cs)
    : R(std::move(r)), tau_s(taus), tau_r(taur), C_s(cs) {
  validate();
}

void LossParams::validate() const {
  if (R.size() == 0) throw InvalidParameter("loss: R must have at least one entry");
  for (Eigen::Index i = 0; i < R.size(); ++i) {
    if (!(R[i] > 0.0) || !std::isfinite(R[i]))
      throw InvalidParameter("loss: R entries must be finite and strictly positive");
  }
  if (std::isnan(tau_s) || !(tau_s > 0.0))
    throw InvalidParameter("loss: tau_s must be > 0 (finite or inf)");
  if (std::isnan(tau_r) || tau_r < 0.0)
    throw InvalidParameter("loss: tau_r must be >= 0 (finite or inf)");
  if (!(C_s > 0.0) || !std::isfinite(C_s))
    throw InvalidParameter("loss: C_s must be finite and > 0");
}

LtiAdmittance::LtiAdmittance(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  validate();
}

LtiAdmittance LtiAdmittance::static_gain(MatrixXd d) {
  const auto np = d.rows();
  LtiAdmittance sys;
  sys.A = MatrixXd::Zero(0, 0);
  sys.B = MatrixXd::Zero(0, np);
  sys.C = MatrixXd::Zero(np, 0);
  sys.D = std::move(d);
  sys.validate();
  return sys;
}

void LtiAdmittance::validate() const {
  if (D.rows() == 0 || D.rows() != D.cols())
    throw DimensionMismatch("lti: D must be square with n_p >= 1");
  const auto nn = A.rows();
  const auto np = D.rows();
  if (A.cols() != nn) throw DimensionMismatch("lti: A must be square");
  if (B.rows() != nn || B.cols() != np)
    throw DimensionMismatch("lti: B must be n x n_p");
  if (C.rows() != np || C.cols() != nn)
    throw DimensionMismatch("lti: C must be n_p x n");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
    throw InvalidParameter("lti: matrices must be finite");
}

void LtvAdmittanceGrid::validate() const {
  const size_t N = t.size();
  if (N < 2) throw InvalidParameter("ltv: grid needs at least 2 samples");
  if (A.size() != N || B.size() != N || C.size() != N || D.size() != N)
    throw DimensionMismatch("ltv: matrix sample counts must match t");
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw InvalidParameter("ltv: times must be strictly increasing");
  const double h = span / double(N - 1);
  for (size_t k = 0; k + 1 < N; ++k) {
    const double hk = t[k + 1] - t[k];
    if (!(hk > 0.0)) throw InvalidParameter("ltv: times must be strictly increasing");
    if (std::abs(hk - h) > 1e-9 * h)
      throw InvalidParameter("ltv: grid must be uniformly spaced (1e-9 relative)");
  }
  const auto nn = A.front().rows();
  const auto np = D.front().rows();
  for (size_t k = 0; k < N; ++k) {
    LtiAdmittance sample(A[k], B[k], C[k], D[k]);  // reuses per-sample checks
    if (sample.n() != nn || sample.ports() != np)
      throw DimensionMismatch("ltv: all samples must share n and n_p");
  }
}

LtvAdmittanceGrid LtvAdmittanceGrid::constant(const LtiAdmittance& sys, double t0,
                                              double t1, int samples) {
  if (samples < 2) throw InvalidParameter("ltv: need at least 2 samples");
  LtvAdmittanceGrid g;
  g.t.resize(samples);
  const double h = (t1 - t0) / double(samples - 1);
  for (int k = 0; k < samples; ++k) g.t[k] = t0 + h * k;
  g.A.assign(samples, sys.A);
  g.B.assign(samples, sys.B);
  g.C.assign(samples, sys.C);
  g.D.assign(samples, sys.D);
  g.validate();
  return g;
}

FoLeadLag::FoLeadLag(double kp, double wl, double wh, double m)
    : k_p(kp), omega_L(wl), omega_h(wh), mu(m) {
  validate();
}

void FoLeadLag::validate() const {
  if (!(k_p > 0.0) || !std::isfinite(k_p))
    throw InvalidParameter("fo: k_p must be finite and > 0");
  if (!(omega_L > 0.0) || !(omega_h > omega_L) || !std::isfinite(omega_h))
    throw InvalidParameter("fo: need 0 < omega_L < omega_h");
  if (!std::isfinite(mu)) throw InvalidParameter("fo: mu must be finite");
}

double FoLeadLag::z11() const { return k_p * std::pow(omega_h / omega_L, mu); }

}  // namespace spsa
