#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace spsa {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXcd = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Parasitic loss parameters of the storage/actuation hardware.
///
/// R is the diagonal actuator resistance matrix (ohms), tau_s = R_s*C_s the
/// leakage time constant, tau_r = R_r*C_s the transmission time constant.
/// tau_s and tau_r accept +infinity as an exact sentinel (not a large float):
/// tau_s = inf means no leakage, tau_r = inf means storage cannot transmit.
/// C_s only enters the reporting of storage voltage/current.
struct LossParams {
  VectorXd R;          // diagonal entries, strictly positive
  double tau_s = kInf; // > 0, finite or +inf
  double tau_r = 0.0;  // >= 0, finite or +inf
  double C_s = 1.0;    // > 0, farads

  LossParams() = default;
  LossParams(VectorXd r, double taus, double taur, double cs = 1.0);

  int ports() const { return static_cast<int>(R.size()); }
  bool leakless() const { return tau_s == kInf; }

  /// Throws InvalidParameter if any invariant is violated.
  void validate() const;

  MatrixXd R_matrix() const { return R.asDiagonal(); }
  MatrixXd R_inv() const { return R.cwiseInverse().asDiagonal(); }
  MatrixXd R_sqrt() const { return R.cwiseSqrt().asDiagonal(); }
  MatrixXd R_inv_sqrt() const { return R.cwiseSqrt().cwiseInverse().asDiagonal(); }

  /// 2/tau_s, exactly zero for tau_s = inf.
  double leak_rate() const { return leakless() ? 0.0 : 2.0 / tau_s; }
};

/// State-space realization of an LTI admittance Y: v -> -u,
///   dx/dt = A x + B v,   -u = C x + D v.
/// n = 0 is the static admittance Y(s) = D (A, B, C empty).
struct LtiAdmittance {
  MatrixXd A;  // n x n
  MatrixXd B;  // n x n_p
  MatrixXd C;  // n_p x n
  MatrixXd D;  // n_p x n_p

  LtiAdmittance() = default;
  LtiAdmittance(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d);

  /// Static admittance with zero state dimension.
  static LtiAdmittance static_gain(MatrixXd d);

  int n() const { return static_cast<int>(A.rows()); }
  int ports() const { return static_cast<int>(D.rows()); }

  void validate() const;
};

/// Time-sampled realization of an LTV admittance on a uniform grid.
/// All samples share the state dimension n and port count n_p; the grid must
/// be uniformly spaced (within 1e-9 relative), as required by the
/// finite-difference scheme in the LTV feasibility program.
struct LtvAdmittanceGrid {
  std::vector<double> t;     // N_s + 1 strictly increasing times
  std::vector<MatrixXd> A;   // per-sample n x n
  std::vector<MatrixXd> B;   // per-sample n x n_p
  std::vector<MatrixXd> C;   // per-sample n_p x n
  std::vector<MatrixXd> D;   // per-sample n_p x n_p

  int samples() const { return static_cast<int>(t.size()); }
  int n() const { return A.empty() ? 0 : static_cast<int>(A.front().rows()); }
  int ports() const { return D.empty() ? 0 : static_cast<int>(D.front().rows()); }
  double dt() const { return t.size() > 1 ? (t.back() - t.front()) / double(t.size() - 1) : 0.0; }

  void validate() const;

  /// Constant-in-time grid replicating an LTI system (test/embedding helper).
  static LtvAdmittanceGrid constant(const LtiAdmittance& sys, double t0, double t1, int samples);
};

/// Fractional-order lead-lag filter
///   Y(s) = k_p * ((1 + s/omega_L) / (1 + s/omega_h))^mu
/// with 0 < omega_L < omega_h and real order mu.
struct FoLeadLag {
  double k_p = 1.0;
  double omega_L = 1.0;
  double omega_h = 10.0;
  double mu = 1.0;

  FoLeadLag() = default;
  FoLeadLag(double kp, double wl, double wh, double m);

  void validate() const;

  /// High-frequency gain z11 = k_p * (omega_h/omega_L)^mu, the LFT feedthrough.
  double z11() const;
};

}  // namespace spsa
