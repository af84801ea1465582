#pragma once

#include <string>
#include <vector>

#include "spsa/pareto.hpp"
#include "spsa/types.hpp"

namespace spsa {

/// LFT scalars of the fractional-order admittance. z11 is pinned to
/// k_p (omega_h/omega_L)^mu by the filter; z12, z21, z22 are free parameters.
struct FoLftParams {
  double z11 = 0.0;
  double z12 = 0.0;
  double z21 = 0.0;
  double z22 = 0.0;
};

/// Filter parameters attaining peak phase phi_m (degrees) and gain gamma_m at
/// omega_m for the given order mu. Peak-phase symmetry puts
/// omega_m = sqrt(omega_L omega_h); the corner ratio solves
/// sin(phi_m/mu) = (x - 1)/(x + 1). Throws SpecUnachievable when phi_m = 0,
/// sign(phi_m) != sign(mu), or |phi_m| >= 90|mu| degrees.
FoLeadLag design_from_specs(double phi_m_deg, double gamma_m, double omega_m, double mu);

/// Log-spaced default constraint grid covering [omega_L/100, 100 omega_h],
/// 4096 points.
std::vector<double> default_omega_grid(const FoLeadLag& f, int points = 4096);

struct FoMargins {
  bool feasible = false;
  double z_min_eig = 0.0;      // min eig of Z + Z^T - 2 Z^T W Z (>= 0 required)
  double freq_worst = 0.0;     // max over grid of z12 z21 Re{W} + z22 |W|^2 (<= 0)
  double freq_tail = 0.0;      // exact w -> inf coefficient of the same constraint
  double ivt_value = 0.0;      // tau_r z11 mu (w_h - w_L) / (z12 z21) (<= 1)
  double worst = 0.0;          // most-violated of the three families (<= 0)
};

/// Checks the three constraint families for given LFT scalars: the static Z
/// condition, the shifted frequency-domain condition on the grid plus its
/// w -> inf tail, and the initial-value bound on tau_r. Throws
/// AnalyticityViolation when omega_h * tau_s < 1 (shifted branch point enters
/// the closed right half-plane).
FoMargins fo_feasibility(const FoLeadLag& f, const LossParams& loss, double z12,
                         double z21, double z22, const std::vector<double>& omega_grid,
                         double tol = 1e-7);

struct FoMaxResult {
  MaxTauRStatus status = MaxTauRStatus::InfeasibleAtZero;
  double tau_r = 0.0;
  FoLftParams z;       // optimizing LFT scalars
  double p_star = 0.0; // z12 * z21 at the optimum
};

/// Largest tau_r for fixed (R, tau_s). tau_r enters only the initial-value
/// bound, so tau_r* = p* / (z11 mu (omega_h - omega_L)) with p* the largest
/// z12 z21 admitted by the Z condition and the frequency condition
/// (p >= z22 * sup |W|^2 / (-Re W)). The inner search over (z12, z22) is a
/// deterministic grid plus golden-section refinement; the reported optimum is
/// re-verified through fo_feasibility. R must be scalar (SISO filter).
FoMaxResult fo_max_tau_r(const FoLeadLag& f, double R, double tau_s, double tol = 1e-4);

struct BackbonePoint {
  double mu = 0.0;
  bool feasible = false;
  double tau_r_max = 0.0;
  double tau_s_inv_max = 0.0;
  FoLeadLag filter;
  std::string error;
};

/// Corner points (max tau_s^-1, max tau_r) per mu; tau_r* is evaluated at the
/// given tau_s, the tau_s^-1 limit by scan + bisection of feasibility at
/// tau_r = 0 (analyticity gate plus frequency/Z feasibility). Per-mu errors
/// are recorded, not thrown.
std::vector<BackbonePoint> backbone(const std::vector<double>& mu_grid, double phi_m_deg,
                                    double gamma_m, double omega_m, double R,
                                    double tau_s);

/// CSV columns: mu, tau_r_max, tau_s_inv_max, kp, wL, wh.
void write_backbone_csv(const std::string& path, const std::vector<BackbonePoint>& pts);
void write_backbone_svg(const std::string& path, const std::vector<BackbonePoint>& pts);

/// One-state realization of the mu = 1 filter (rational-embedding oracle):
/// A = [-omega_h], B = [1], C = [z11 (omega_L - omega_h)], D = [z11].
LtiAdmittance rational_embedding(const FoLeadLag& f);

}  // namespace spsa
