#include "spsa/fo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spsa/errors.hpp"
#include "spsa/io_util.hpp"
#include "spsa/lmi.hpp"
#include "spsa/model.hpp"
#include "spsa/svg.hpp"

namespace spsa {

FoLeadLag design_from_specs(double phi_m_deg, double gamma_m, double omega_m, double mu) {
  if (!(gamma_m > 0.0)) throw InvalidParameter("design: gamma_m must be > 0");
  if (!(omega_m > 0.0)) throw InvalidParameter("design: omega_m must be > 0");
  if (mu == 0.0) throw InvalidParameter("design: mu must be nonzero");
  if (phi_m_deg == 0.0)
    throw SpecUnachievable("design: phi_m = 0 degenerates to omega_L = omega_h");
  if (phi_m_deg * mu < 0.0)
    throw SpecUnachievable("design: phi_m and mu must have the same sign");
  if (std::abs(phi_m_deg) >= 90.0 * std::abs(mu))
    throw SpecUnachievable("design: |phi_m| must be below 90*|mu| degrees");

  // peak phase at omega_m = sqrt(omega_L omega_h); the base lead contributes
  // phase psi with sin(psi) = (x - 1)/(x + 1), x = omega_h/omega_L
  const double psi = (phi_m_deg / mu) * M_PI / 180.0;
  const double x = (1.0 + std::sin(psi)) / (1.0 - std::sin(psi));
  FoLeadLag f;
  f.omega_L = omega_m / std::sqrt(x);
  f.omega_h = omega_m * std::sqrt(x);
  f.mu = mu;
  f.k_p = gamma_m * std::pow(x, -mu / 2.0);  // |base(j omega_m)|^mu = x^(mu/2)
  f.validate();

  // residual check of the three defining equations
  const Complex y = eval_tf_fo(f, Complex(0.0, omega_m));
  const double gain_err = std::abs(std::abs(y) / gamma_m - 1.0);
  const double phase_err = std::abs(std::arg(y) - phi_m_deg * M_PI / 180.0);
  if (gain_err > 1e-10 || phase_err > 1e-10)
    throw SpecUnachievable("design: residual check failed (gain err " +
                           std::to_string(gain_err) + ", phase err " +
                           std::to_string(phase_err) + ")");
  return f;
}

std::vector<double> default_omega_grid(const FoLeadLag& f, int points) {
  if (points < 2) throw InvalidParameter("omega grid needs >= 2 points");
  const double lo = f.omega_L / 100.0;
  const double hi = 100.0 * f.omega_h;
  std::vector<double> w(points);
  const double step = std::log(hi / lo) / double(points - 1);
  for (int i = 0; i < points; ++i) w[i] = lo * std::exp(step * i);
  return w;
}

namespace {

void require_gate(const FoLeadLag& f, double tau_s) {
  if (tau_s != kInf && f.omega_h * tau_s < 1.0)
    throw AnalyticityViolation(
        "omega_h * tau_s = " + std::to_string(f.omega_h * tau_s) +
        " < 1: the shifted branch point enters the closed right half-plane");
}

// Z + Z^T - 2 Z^T W Z for Z = [[a, b], [c, d]], W = diag(R, 1).
Eigen::Matrix2d z_condition(double a, double b, double c, double d, double R) {
  Eigen::Matrix2d M;
  M(0, 0) = 2.0 * a * (1.0 - R * a) - 2.0 * c * c;
  M(0, 1) = b * (1.0 - 2.0 * R * a) + c * (1.0 - 2.0 * d);
  M(1, 0) = M(0, 1);
  M(1, 1) = 2.0 * d * (1.0 - d) - 2.0 * R * b * b;
  return M;
}

// omega -> infinity expansion  W(jw) ~ -a_c/(s+w_h) + b_c/(s+w_h)^2  at
// s = jw - 1/tau_s gives the exact tail coefficient of
// z12 z21 Re{W} + z22 |W|^2 (times w^2).
struct TailCoeffs {
  double a_c;   // z11 mu (w_h - w_L)
  double b_c;   // z11 mu (mu - 1) (w_h - w_L)^2 / 2
  double d_s;   // w_h - 1/tau_s >= 0 under the gate
  double denom() const { return a_c * d_s + b_c; }
};

TailCoeffs tail_coeffs(const FoLeadLag& f, double tau_s) {
  const double h = f.omega_h - f.omega_L;
  TailCoeffs t;
  t.a_c = f.z11() * f.mu * h;
  t.b_c = f.z11() * f.mu * (f.mu - 1.0) * h * h / 2.0;
  t.d_s = f.omega_h - (tau_s == kInf ? 0.0 : 1.0 / tau_s);
  return t;
}

double tail_value(const TailCoeffs& t, double p, double d) {
  return p * (-(t.a_c * t.d_s + t.b_c)) + d * t.a_c * t.a_c;
}

// Shifted-response data entering the frequency condition: for the pointwise
// constraint p (-Re W) >= d |W|^2 this reduces to p >= d * S with
// S = sup |W|^2 / (-Re W); S = inf encodes "no positive z22 admissible".
struct FreqData {
  bool p_positive_ok = true;  // Re W <= 0 everywhere (needed for any p > 0)
  double max_re = -kInf;
  double S = 0.0;
};

FreqData freq_data(const FoLeadLag& f, double tau_s, const std::vector<double>& grid) {
  FreqData out;
  const double a = f.z11();
  const double re_tol = 1e-11 * std::max(1.0, a);
  for (double w : grid) {
    const Complex W = shift_frequency(f, tau_s, w) - a;
    const double re = W.real();
    const double m2 = std::norm(W);
    out.max_re = std::max(out.max_re, re);
    if (re > re_tol) {
      out.p_positive_ok = false;
      continue;
    }
    if (-re > 1e-300)
      out.S = std::max(out.S, m2 / (-re));
    else if (m2 > re_tol * re_tol)
      out.S = kInf;
  }
  const TailCoeffs t = tail_coeffs(f, tau_s);
  if (t.denom() > 0.0)
    out.S = std::max(out.S, t.a_c * t.a_c / t.denom());
  else
    out.S = kInf;
  return out;
}

}  // namespace

FoMargins fo_feasibility(const FoLeadLag& f, const LossParams& loss, double z12,
                         double z21, double z22, const std::vector<double>& omega_grid,
                         double tol) {
  f.validate();
  loss.validate();
  if (loss.ports() != 1) throw DimensionMismatch("fo: R must be scalar (SISO filter)");
  if (omega_grid.size() < 2) throw InvalidParameter("fo: omega grid too small");
  require_gate(f, loss.tau_s);

  const double R = loss.R[0];
  const double a = f.z11();
  const double p = z12 * z21;

  FoMargins m;
  m.z_min_eig = min_eig(z_condition(a, z12, z21, z22, R));

  double worst_freq = -kInf;
  for (double w : omega_grid) {
    const Complex W = shift_frequency(f, loss.tau_s, w) - a;
    worst_freq = std::max(worst_freq, p * W.real() + z22 * std::norm(W));
  }
  m.freq_worst = worst_freq;
  m.freq_tail = tail_value(tail_coeffs(f, loss.tau_s), p, z22);

  const double ivt_num = loss.tau_r == kInf ? kInf : loss.tau_r * a * f.mu * (f.omega_h - f.omega_L);
  if (loss.tau_r == 0.0) {
    m.ivt_value = 0.0;  // vacuous
  } else if (p != 0.0) {
    m.ivt_value = ivt_num / p;
  } else {
    m.ivt_value = ivt_num > 0.0 ? kInf : 0.0;
  }

  const double zscale = std::max(1.0, a * a);
  m.worst = std::max({-m.z_min_eig, m.freq_worst / zscale, m.freq_tail / zscale,
                      m.ivt_value - 1.0});
  m.feasible = m.z_min_eig >= -tol * zscale &&
               m.freq_worst <= tol * zscale &&
               m.freq_tail <= tol * zscale &&
               m.ivt_value <= 1.0 + tol;
  return m;
}

namespace {

// Largest z21 admitted by the Z condition for fixed (z12 = b, z22 = d):
// the determinant constraint is a downward quadratic in c.
double max_z21(double a, double b, double d, double R) {
  const double c_bar2 = a * (1.0 - R * a);
  if (!(c_bar2 > 0.0)) return 0.0;
  const double c_bar = std::sqrt(c_bar2);
  const double m22 = 2.0 * d * (1.0 - d) - 2.0 * R * b * b;
  if (m22 < 0.0) return 0.0;
  const double Aq = -(2.0 * m22 + (1.0 - 2.0 * d) * (1.0 - 2.0 * d));
  const double Bq = -2.0 * b * (1.0 - 2.0 * R * a) * (1.0 - 2.0 * d);
  const double Cq = 2.0 * c_bar2 * m22 - b * b * (1.0 - 2.0 * R * a) * (1.0 - 2.0 * R * a);
  if (Aq >= -1e-300) {  // degenerate: m22 = 0 and d = 1/2
    if (Cq < 0.0) return 0.0;
    return c_bar;
  }
  const double disc = Bq * Bq - 4.0 * Aq * Cq;
  if (disc < 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  const double r1 = (-Bq + sq) / (2.0 * Aq);
  const double r2 = (-Bq - sq) / (2.0 * Aq);
  const double c_hi = std::max(r1, r2);
  const double c_lo = std::min(r1, r2);
  if (c_hi < -c_bar || c_lo > c_bar) return 0.0;  // intervals disjoint
  return std::min(c_hi, c_bar);
}

// max over b in (0, b_hi) of b * max_z21(b); deterministic grid + golden.
double max_p_at(double a, double d, double R) {
  const double bh2 = d * (1.0 - d) / R;
  if (!(bh2 > 0.0)) return 0.0;
  const double b_hi = std::sqrt(bh2);
  auto val = [&](double b) { return b * max_z21(a, b, d, R); };

  const int G = 96;
  double best_b = 0.0, best = 0.0;
  for (int i = 1; i < G; ++i) {
    const double b = b_hi * double(i) / double(G);
    const double v = val(b);
    if (v > best) {
      best = v;
      best_b = b;
    }
  }
  if (best <= 0.0) return 0.0;
  double lo = std::max(0.0, best_b - b_hi / G);
  double hi = std::min(b_hi, best_b + b_hi / G);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = val(x1), f2 = val(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = val(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = val(x1);
    }
  }
  return std::max(best, std::max(f1, f2));
}

struct InnerOptimum {
  bool feasible = false;
  double p = 0.0;
  double d = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// max p = z12 z21 over the Z condition and p >= d * S; see header notes.
InnerOptimum max_p(double a, double R, const FreqData& fd) {
  InnerOptimum out;
  if (!(a * (1.0 - R * a) > 0.0)) return out;  // z21 must vanish: no LFT
  if (!fd.p_positive_ok) return out;           // p > 0 impossible

  auto g = [&](double d) { return max_p_at(a, d, R); };

  // unconstrained maximum of g over d in (0,1)
  const int G = 160;
  double dstar = 0.0, gstar = 0.0;
  for (int i = 1; i < G; ++i) {
    const double d = double(i) / double(G);
    const double v = g(d);
    if (v > gstar) {
      gstar = v;
      dstar = d;
    }
  }
  if (gstar <= 0.0) return out;
  {
    double lo = std::max(1e-12, dstar - 1.0 / G), hi = std::min(1.0 - 1e-12, dstar + 1.0 / G);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = g(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = g(x1);
      }
    }
    const double dm = 0.5 * (lo + hi);
    if (g(dm) > gstar) {
      gstar = g(dm);
      dstar = dm;
    }
  }

  auto slack = [&](double d) { return g(d) - d * fd.S; };  // >= 0 means feasible

  double d_opt, p_opt;
  if (fd.S == kInf) {
    return out;
  } else if (slack(dstar) >= 0.0) {
    d_opt = dstar;
    p_opt = gstar;
  } else {
    // constrained optimum sits where g(d) = d S on the rising branch
    double lo = 1e-12, hi = dstar;
    if (slack(lo) < 0.0) return out;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (slack(mid) >= 0.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-12) break;
    }
    d_opt = lo;
    p_opt = g(lo);
    if (!(p_opt > 0.0)) return out;
  }

  out.feasible = true;
  out.d = d_opt;
  out.p = p_opt;
  // recover the (b, c) split realizing p
  const double bh = std::sqrt(d_opt * (1.0 - d_opt) / R);
  double best_b = 0.0, best_v = 0.0;
  for (int i = 1; i <= 4096; ++i) {
    const double b = bh * double(i) / 4096.0;
    const double v = b * max_z21(a, b, d_opt, R);
    if (v > best_v) {
      best_v = v;
      best_b = b;
    }
  }
  out.b = best_b;
  out.c = best_b > 0.0 ? std::min(max_z21(a, best_b, d_opt, R), p_opt / best_b) : 0.0;
  out.p = out.b * out.c;
  return out;
}

}  // namespace

FoMaxResult fo_max_tau_r(const FoLeadLag& f, double R, double tau_s, double tol) {
  f.validate();
  if (!(R > 0.0)) throw InvalidParameter("fo_max_tau_r: R must be > 0");
  if (!(tol > 0.0)) throw InvalidParameter("fo_max_tau_r: tol must be > 0");
  require_gate(f, tau_s);

  FoMaxResult res;
  res.z.z11 = f.z11();

  const std::vector<double> grid = default_omega_grid(f);
  const FreqData fd = freq_data(f, tau_s, grid);
  const InnerOptimum opt = max_p(f.z11(), R, fd);
  if (!opt.feasible) {
    res.status = MaxTauRStatus::InfeasibleAtZero;
    return res;
  }
  res.z.z12 = opt.b;
  res.z.z21 = opt.c;
  res.z.z22 = opt.d;
  res.p_star = opt.p;

  const double g_iv = f.z11() * f.mu * (f.omega_h - f.omega_L);
  if (!(g_iv > 0.0)) {
    // initial-value bound imposes no limit; report the bracket cap
    res.status = MaxTauRStatus::AtBracketBound;
    res.tau_r = Bracket{}.cap;
    return res;
  }
  res.status = MaxTauRStatus::Ok;
  res.tau_r = opt.p / g_iv;
  return res;
}

std::vector<BackbonePoint> backbone(const std::vector<double>& mu_grid, double phi_m_deg,
                                    double gamma_m, double omega_m, double R,
                                    double tau_s) {
  std::vector<BackbonePoint> out;
  for (double mu : mu_grid) {
    BackbonePoint pt;
    pt.mu = mu;
    try {
      pt.filter = design_from_specs(phi_m_deg, gamma_m, omega_m, mu);
      const std::vector<double> grid = default_omega_grid(pt.filter);
      const double a = pt.filter.z11();

      auto feasible_at = [&](double ts) {
        if (ts != kInf && pt.filter.omega_h * ts < 1.0) return false;
        const FreqData fd = freq_data(pt.filter, ts, grid);
        return max_p(a, R, fd).feasible;
      };

      if (!feasible_at(kInf)) {
        pt.feasible = false;
        out.push_back(pt);
        continue;
      }
      const FoMaxResult mr = fo_max_tau_r(pt.filter, R, tau_s, 1e-4);
      pt.feasible = mr.status != MaxTauRStatus::InfeasibleAtZero;
      pt.tau_r_max = mr.tau_r;

      // largest feasible tau_s^-1: ascending scan then bisection
      const double cap = pt.filter.omega_h;
      double last_ok = 0.0, first_bad = cap;
      bool found_bad = false;
      const int S = 96;
      for (int i = 1; i <= S; ++i) {
        const double tsi = cap * std::pow(10.0, -5.0 * (1.0 - double(i) / S));
        if (feasible_at(1.0 / tsi)) {
          last_ok = tsi;
        } else {
          first_bad = tsi;
          found_bad = true;
          break;
        }
      }
      if (!found_bad && feasible_at(1.0 / cap)) {
        pt.tau_s_inv_max = cap;
      } else {
        double lo = last_ok, hi = first_bad;
        for (int it = 0; it < 60 && hi - lo > 1e-6 * cap; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (feasible_at(1.0 / mid))
            lo = mid;
          else
            hi = mid;
        }
        pt.tau_s_inv_max = lo;
      }
    } catch (const std::exception& e) {
      pt.error = e.what();
      pt.feasible = false;
    }
    out.push_back(pt);
  }
  return out;
}

void write_backbone_csv(const std::string& path, const std::vector<BackbonePoint>& pts) {
  std::ostringstream out;
  out << "mu,tau_r_max,tau_s_inv_max,kp,wL,wh\n";
  out.precision(15);
  for (const auto& pt : pts) {
    if (!pt.error.empty() || !pt.feasible) {
      out << pt.mu << ",nan,nan," << pt.filter.k_p << ',' << pt.filter.omega_L << ','
          << pt.filter.omega_h << '\n';
      continue;
    }
    out << pt.mu << ',' << pt.tau_r_max << ',' << pt.tau_s_inv_max << ',' << pt.filter.k_p
        << ',' << pt.filter.omega_L << ',' << pt.filter.omega_h << '\n';
  }
  write_file_atomic(path, out.str());
}

void write_backbone_svg(const std::string& path, const std::vector<BackbonePoint>& pts) {
  SvgPlot plot(720, 480, "tau_s^-1 [1/s]", "tau_r [s]");
  plot.log_x = true;
  plot.log_y = true;
  std::vector<std::pair<double, double>> curve;
  for (const auto& pt : pts)
    if (pt.feasible && pt.error.empty() && pt.tau_r_max > 0.0 && pt.tau_s_inv_max > 0.0)
      curve.emplace_back(pt.tau_s_inv_max, pt.tau_r_max);
  plot.polyline(curve, "#1f77b4", 2.0);
  plot.markers(curve, "#1f77b4", 3.5);
  plot.legend("backbone corner points", "#1f77b4");
  write_file_atomic(path, plot.render());
}

LtiAdmittance rational_embedding(const FoLeadLag& f) {
  if (f.mu != 1.0) throw InvalidParameter("rational_embedding: only mu = 1 is rational");
  const double z11 = f.z11();
  MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -f.omega_h;
  B << 1.0;
  C << z11 * (f.omega_L - f.omega_h);
  D << z11;
  return LtiAdmittance(A, B, C, D);
}

}  // namespace spsa
