#include "spsa/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "spsa/errors.hpp"
#include "spsa/io_util.hpp"
#include "spsa/svg.hpp"

namespace spsa {

const char* to_string(MaxTauRStatus s) {
  switch (s) {
    case MaxTauRStatus::Ok: return "ok";
    case MaxTauRStatus::InfeasibleAtZero: return "infeasible_at_zero";
    default: return "at_bracket_bound";
  }
}

MaxTauRResult max_tau_r(const LtiAdmittance& sys, const VectorXd& R, double tau_s,
                        Bracket bracket, double tol_rel, double tol) {
  if (!(tol_rel > 0.0) || tol_rel > 0.1)
    throw InvalidParameter("max_tau_r: tol_rel must be in (0, 0.1]");
  if (!(bracket.hi > 0.0) || !(bracket.cap >= bracket.hi))
    throw InvalidParameter("max_tau_r: bad bracket");

  MaxTauRResult res;
  auto probe = [&](double tau_r) {
    LossParams loss(R, tau_s, tau_r);
    LmiProblem p = assemble_sufficient(sys, loss, tol);
    ++res.solves;
    return solve_feasibility(p, tol);
  };

  const SolveResult at_zero = probe(0.0);
  if (at_zero.status != FeasStatus::Feasible) {
    res.status = MaxTauRStatus::InfeasibleAtZero;
    res.feasible_margin = at_zero.margin;
    return res;
  }
  res.certificate = at_zero.certificate;
  res.feasible_margin = at_zero.margin;

  double lo = 0.0;
  double hi = bracket.hi;
  while (true) {
    const SolveResult r = probe(hi);
    if (r.status == FeasStatus::Feasible) {
      lo = hi;
      res.certificate = r.certificate;
      res.feasible_margin = r.margin;
      if (hi >= bracket.cap) {
        res.status = MaxTauRStatus::AtBracketBound;
        res.tau_r = bracket.cap;  // reported as ">= bound"
        return res;
      }
      hi = std::min(hi * 10.0, bracket.cap);
    } else {
      break;
    }
  }

  // invariant: lo Feasible (or 0), hi not Feasible
  while (hi - lo > tol_rel * std::max(lo, 1e-12 * bracket.hi)) {
    const double mid = 0.5 * (lo + hi);
    const SolveResult r = probe(mid);
    if (r.status == FeasStatus::Feasible) {
      lo = mid;
      res.certificate = r.certificate;
      res.feasible_margin = r.margin;
    } else {
      hi = mid;
    }
  }
  res.status = MaxTauRStatus::Ok;
  res.tau_r = lo;
  res.infeasible_at = hi;
  return res;
}

ParetoFront sweep(const LtiAdmittance& sys, const VectorXd& R_base,
                  const std::vector<double>& r_scales,
                  const std::vector<double>& tau_s_grid, Bracket bracket,
                  double tol_rel, double tol, int threads) {
  if (r_scales.empty() || tau_s_grid.empty())
    throw InvalidParameter("sweep: grids must be non-empty");
  for (double r : r_scales)
    if (!(r > 0.0)) throw InvalidParameter("sweep: R scales must be positive");
  for (double ts : tau_s_grid)
    if (!(ts > 0.0)) throw InvalidParameter("sweep: tau_s values must be positive");

  ParetoFront front;
  front.r_scales = r_scales;
  front.tau_s_grid = tau_s_grid;
  front.points.resize(r_scales.size() * tau_s_grid.size());

  const int total = static_cast<int>(front.points.size());
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      const int ir = idx / static_cast<int>(tau_s_grid.size());
      const int is = idx % static_cast<int>(tau_s_grid.size());
      ParetoPoint& pt = front.points[idx];
      pt.r_scale = r_scales[ir];
      pt.tau_s = tau_s_grid[is];
      pt.tau_s_inv = tau_s_grid[is] == kInf ? 0.0 : 1.0 / tau_s_grid[is];
      try {
        const VectorXd R = r_scales[ir] * R_base;
        const MaxTauRResult r = max_tau_r(sys, R, tau_s_grid[is], bracket, tol_rel, tol);
        pt.status = r.status;
        pt.tau_r_max = r.tau_r;
        pt.margin = r.feasible_margin;
      } catch (const std::exception& e) {
        pt.error = e.what();
      }
    }
  };

  int nthreads = threads > 0 ? threads
                             : static_cast<int>(std::min<unsigned>(
                                   std::max(1u, std::thread::hardware_concurrency()), 8u));
  nthreads = std::min(nthreads, total);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return front;
}

void write_pareto_csv(const std::string& path, const ParetoFront& front) {
  std::ostringstream out;
  out << "R_scale,tau_s_inv,tau_r_max,status,margin\n";
  out.precision(15);
  for (const auto& pt : front.points) {
    out << pt.r_scale << ',' << pt.tau_s_inv << ',' << pt.tau_r_max << ','
        << (pt.error.empty() ? to_string(pt.status) : "error") << ',' << pt.margin << '\n';
  }
  write_file_atomic(path, out.str());
}

void write_pareto_svg(const std::string& path, const ParetoFront& front) {
  SvgPlot plot(720, 480, "tau_s^-1 [1/s]", "tau_r [s]");
  plot.log_x = true;
  plot.log_y = true;

  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  double floor_y = kInf;
  for (const auto& pt : front.points)
    if (pt.status != MaxTauRStatus::InfeasibleAtZero && pt.tau_r_max > 0.0)
      floor_y = std::min(floor_y, pt.tau_r_max);
  if (floor_y == kInf) floor_y = 1e-6;
  floor_y *= 1e-2;

  for (size_t ir = 0; ir < front.r_scales.size(); ++ir) {
    std::vector<std::pair<double, double>> curve;
    for (size_t is = 0; is < front.tau_s_grid.size(); ++is) {
      const ParetoPoint& pt = front.at(static_cast<int>(ir), static_cast<int>(is));
      if (pt.error.empty() && pt.status != MaxTauRStatus::InfeasibleAtZero &&
          pt.tau_s_inv > 0.0)
        curve.emplace_back(pt.tau_s_inv, std::max(pt.tau_r_max, floor_y));
    }
    if (curve.empty()) continue;
    const char* color = colors[ir % 8];
    // feasible region: fill between the frontier and the floor
    std::vector<std::pair<double, double>> poly = curve;
    poly.emplace_back(curve.back().first, floor_y);
    poly.emplace_back(curve.front().first, floor_y);
    plot.polygon(poly, color, 0.25);
    plot.polyline(curve, color, 2.0);
    std::ostringstream label;
    label << "R x " << front.r_scales[ir];
    plot.legend(label.str(), color);
  }
  write_file_atomic(path, plot.render());
}

}  // namespace spsa
