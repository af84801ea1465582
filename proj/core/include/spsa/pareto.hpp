#pragma once

#include <string>
#include <vector>

#include "spsa/feas_lti.hpp"
#include "spsa/types.hpp"

namespace spsa {

enum class MaxTauRStatus { Ok, InfeasibleAtZero, AtBracketBound };

const char* to_string(MaxTauRStatus s);

struct Bracket {
  double hi = 1e3;   // first upper probe, seconds
  double cap = 1e6;  // geometric expansion stops here
};

struct MaxTauRResult {
  MaxTauRStatus status = MaxTauRStatus::InfeasibleAtZero;
  double tau_r = 0.0;         // largest certified-feasible tau_r (or the cap)
  double feasible_margin = 0.0;  // margin at the certified point
  double infeasible_at = 0.0;    // first infeasible probe (0 when AtBracketBound)
  Certificate certificate;       // certificate at tau_r
  int solves = 0;
};

/// Bisection on tau_r for fixed (R, tau_s): feasibility of the sufficiency
/// LMIs is monotone in tau_r (the -(1/tau_r)P block relaxes as tau_r falls),
/// so the largest Feasible tau_r is found by expanding the bracket
/// geometrically from bracket.hi until the first infeasible probe (cap
/// bracket.cap, reported as AtBracketBound i.e. ">= bound"), then bisecting to
/// tol_rel. The lower bracket starts at tau_r = 0 (reduced LMI);
/// InfeasibleAtZero if that already fails. Indeterminate probes count as
/// not-Feasible.
MaxTauRResult max_tau_r(const LtiAdmittance& sys, const VectorXd& R, double tau_s,
                        Bracket bracket = {}, double tol_rel = 1e-3, double tol = 1e-7);

struct ParetoPoint {
  double r_scale = 1.0;
  double tau_s = kInf;
  double tau_s_inv = 0.0;
  MaxTauRStatus status = MaxTauRStatus::InfeasibleAtZero;
  double tau_r_max = 0.0;
  double margin = 0.0;
  std::string error;  // per-point failures are recorded, never abort the sweep
};

struct ParetoFront {
  std::vector<double> r_scales;
  std::vector<double> tau_s_grid;
  std::vector<ParetoPoint> points;  // row-major: r_scales x tau_s_grid

  const ParetoPoint& at(int ir, int is) const {
    return points[ir * tau_s_grid.size() + is];
  }
};

/// max_tau_r per grid point, R = r_scale * R_base. Points are independent and
/// evaluated on a small thread pool; output ordering is deterministic.
ParetoFront sweep(const LtiAdmittance& sys, const VectorXd& R_base,
                  const std::vector<double>& r_scales,
                  const std::vector<double>& tau_s_grid, Bracket bracket = {},
                  double tol_rel = 1e-3, double tol = 1e-7, int threads = 0);

/// CSV columns: R_scale, tau_s_inv, tau_r_max, status, margin.
void write_pareto_csv(const std::string& path, const ParetoFront& front);
/// Filled feasible-region plot, one region per R value.
void write_pareto_svg(const std::string& path, const ParetoFront& front);

}  // namespace spsa
