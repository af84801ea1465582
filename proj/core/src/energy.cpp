#include "spsa/energy.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "spsa/errors.hpp"
#include "spsa/io_util.hpp"

namespace spsa {

double storage_power(double E_s, double P_e, const LossParams& loss) {
  if (!(E_s > 0.0)) throw InvalidParameter("storage_power: E_s must be > 0");
  if (loss.tau_r == kInf) {
    if (P_e > 0.0)
      throw ChokeError("storage_power: P_e > 0 with tau_r = inf", 0.0, E_s, P_e);
    return 0.0;
  }
  const double x = 2.0 * loss.tau_r * P_e / E_s;
  if (x > 1.0)
    throw ChokeError("storage_power: P_e exceeds E_s/(2 tau_r)", 0.0, E_s, P_e);
  return 2.0 * P_e / (1.0 + std::sqrt(1.0 - x));
}

// ---------------------------------------------------------------------------
// Signals

void Signal::validate() const {
  if (t.size() < 2) throw InvalidParameter("signal: need at least 2 samples");
  if (t.size() != v.size()) throw DimensionMismatch("signal: t/v length mismatch");
  const int np = ports();
  for (size_t k = 0; k < t.size(); ++k) {
    if (k + 1 < t.size() && !(t[k + 1] > t[k]))
      throw InvalidParameter("signal: times must be strictly increasing");
    if (v[k].size() != np) throw DimensionMismatch("signal: inconsistent channel count");
  }
}

VectorXd Signal::at(double time) const {
  if (time <= t.front()) return v.front();
  if (time >= t.back()) return v.back();
  // uniform grids are the common case; fall back to binary search otherwise
  size_t hi = std::upper_bound(t.begin(), t.end(), time) - t.begin();
  size_t lo = hi - 1;
  const double w = (time - t[lo]) / (t[hi] - t[lo]);
  return (1.0 - w) * v[lo] + w * v[hi];
}

Signal sine_signal(int ports, double amp, double omega, double t_end, double dt,
                   double phase_step) {
  if (ports < 1 || !(dt > 0.0) || !(t_end > 0.0) || !(omega > 0.0))
    throw InvalidParameter("sine_signal: bad parameters");
  Signal s;
  const int N = static_cast<int>(std::ceil(t_end / dt)) + 1;
  s.t.resize(N);
  s.v.resize(N);
  for (int k = 0; k < N; ++k) {
    s.t[k] = k * dt;
    VectorXd vk(ports);
    for (int p = 0; p < ports; ++p) vk[p] = amp * std::sin(omega * s.t[k] + phase_step * p);
    s.v[k] = vk;
  }
  return s;
}

Signal noise_signal(int ports, double amp, double omega_max, double t_end, double dt,
                    std::uint64_t seed) {
  if (ports < 1 || !(dt > 0.0) || !(t_end > 0.0) || !(omega_max > 0.0))
    throw InvalidParameter("noise_signal: bad parameters");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };
  const int K = 32;
  std::vector<std::vector<double>> w(ports), ph(ports), a(ports);
  for (int p = 0; p < ports; ++p) {
    w[p].resize(K);
    ph[p].resize(K);
    a[p].resize(K);
    for (int i = 0; i < K; ++i) {
      w[p][i] = omega_max * (0.05 + 0.95 * uniform());
      ph[p][i] = 2.0 * M_PI * uniform();
      a[p][i] = amp / std::sqrt(double(K) / 2.0) * (0.5 + uniform());
    }
  }
  Signal s;
  const int N = static_cast<int>(std::ceil(t_end / dt)) + 1;
  s.t.resize(N);
  s.v.resize(N);
  for (int k = 0; k < N; ++k) {
    s.t[k] = k * dt;
    VectorXd vk = VectorXd::Zero(ports);
    for (int p = 0; p < ports; ++p)
      for (int i = 0; i < K; ++i) vk[p] += a[p][i] * std::sin(w[p][i] * s.t[k] + ph[p][i]);
    s.v[k] = vk;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

struct Dynamics {
  const LtiAdmittance* lti = nullptr;
  const LtvAdmittanceGrid* ltv = nullptr;

  int n() const { return lti ? lti->n() : ltv->n(); }
  int ports() const { return lti ? lti->ports() : ltv->ports(); }

  // piecewise-linear interpolation of the LTV samples; clamped outside
  void matrices(double time, MatrixXd& A, MatrixXd& B, MatrixXd& C, MatrixXd& D) const {
    if (lti) {
      A = lti->A;
      B = lti->B;
      C = lti->C;
      D = lti->D;
      return;
    }
    const auto& g = *ltv;
    if (time <= g.t.front()) {
      A = g.A.front(); B = g.B.front(); C = g.C.front(); D = g.D.front();
      return;
    }
    if (time >= g.t.back()) {
      A = g.A.back(); B = g.B.back(); C = g.C.back(); D = g.D.back();
      return;
    }
    const size_t hi = std::upper_bound(g.t.begin(), g.t.end(), time) - g.t.begin();
    const size_t lo = hi - 1;
    const double w = (time - g.t[lo]) / (g.t[hi] - g.t[lo]);
    A = (1 - w) * g.A[lo] + w * g.A[hi];
    B = (1 - w) * g.B[lo] + w * g.B[hi];
    C = (1 - w) * g.C[lo] + w * g.C[hi];
    D = (1 - w) * g.D[lo] + w * g.D[hi];
  }

  double max_state_rate() const {
    if (lti) {
      if (lti->n() == 0) return 0.0;
      Eigen::EigenSolver<MatrixXd> es(lti->A, false);
      double m = 0.0;
      for (int i = 0; i < lti->n(); ++i) m = std::max(m, std::abs(es.eigenvalues()[i]));
      return m;
    }
    double m = 0.0;
    for (const auto& Ak : ltv->A)
      if (Ak.rows() > 0) m = std::max(m, Ak.jacobiSvd().singularValues()(0));
    return m;
  }
};

struct State {
  VectorXd x;
  double E;
};

struct Rhs {
  const Dynamics* dyn;
  const Signal* sig;
  const LossParams* loss;

  double actuation_power(double time, const VectorXd& x, VectorXd* u_out = nullptr) const {
    MatrixXd A, B, C, D;
    dyn->matrices(time, A, B, C, D);
    const VectorXd v = sig->at(time);
    const VectorXd u = -(C * x + D * v);
    if (u_out) *u_out = u;
    return u.dot(v) + u.dot(loss->R.cwiseProduct(u));
  }

  // dE/dt = -(2/tau_s) E - P_s; sqrt argument clamped at the choke boundary so
  // stage evaluations during event bracketing stay finite.
  State deriv(double time, const State& s) const {
    MatrixXd A, B, C, D;
    dyn->matrices(time, A, B, C, D);
    const VectorXd v = sig->at(time);
    const VectorXd u = -(C * s.x + D * v);
    const double pe = u.dot(v) + u.dot(loss->R.cwiseProduct(u));
    State d;
    d.x = A * s.x + B * v;
    double ps;
    if (loss->tau_r == kInf) {
      ps = 0.0;
    } else if (s.E > 0.0) {
      const double x = std::min(1.0, 2.0 * loss->tau_r * pe / s.E);
      ps = 2.0 * pe / (1.0 + std::sqrt(1.0 - x));
    } else {
      ps = std::max(0.0, pe);
    }
    d.E = -loss->leak_rate() * s.E - ps;
    return d;
  }
};

State axpy(const State& a, double h, const State& b) {
  return {a.x + h * b.x, a.E + h * b.E};
}

State rk4(const Rhs& f, double t, const State& s, double h) {
  const State k1 = f.deriv(t, s);
  const State k2 = f.deriv(t + 0.5 * h, axpy(s, 0.5 * h, k1));
  const State k3 = f.deriv(t + 0.5 * h, axpy(s, 0.5 * h, k2));
  const State k4 = f.deriv(t + h, axpy(s, h, k3));
  State out = s;
  out.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.E += (h / 6.0) * (k1.E + 2.0 * k2.E + 2.0 * k3.E + k4.E);
  return out;
}

// two half steps (the accepted value) + error estimate vs one full step
State rk4_pair(const Rhs& f, double t, const State& s, double h, double* err_rel) {
  const State full = rk4(f, t, s, h);
  const State half = rk4(f, t + 0.5 * h, rk4(f, t, s, 0.5 * h), 0.5 * h);
  double scale = std::max(1e-300, std::abs(half.E));
  double err = std::abs(full.E - half.E);
  if (half.x.size() > 0) {
    scale = std::max(scale, half.x.cwiseAbs().maxCoeff());
    err = std::max(err, (full.x - half.x).cwiseAbs().maxCoeff());
  }
  *err_rel = err / std::max(scale, 1.0);
  return half;
}

EnergyTrajectory run(const Dynamics& dyn, const Signal& sig, double E_s0,
                     const LossParams& loss, double dt) {
  sig.validate();
  loss.validate();
  if (!(E_s0 > 0.0)) throw InvalidParameter("simulate: E_s0 must be > 0");
  if (!(dt > 0.0)) throw InvalidParameter("simulate: dt must be > 0");
  if (sig.ports() != dyn.ports()) throw DimensionMismatch("simulate: signal/system port mismatch");
  if (loss.ports() != dyn.ports()) throw DimensionMismatch("simulate: loss/system port mismatch");
  const double rate = dyn.max_state_rate();
  if (rate > 0.0 && dt > 0.1 / rate + 1e-12 / rate)
    throw StepTooLarge("simulate: dt exceeds a tenth of the fastest system time constant");

  Rhs f{&dyn, &sig, &loss};
  EnergyTrajectory traj;
  double pscale = 1.0;

  auto choked = [&](double time, const State& s, double* pe_out) {
    const double pe = f.actuation_power(time, s.x);
    if (pe_out) *pe_out = pe;
    if (s.E <= 0.0) return true;
    if (loss.tau_r == kInf) return pe > 1e-9 * pscale;
    if (loss.tau_r == 0.0) return false;
    return pe > s.E / (2.0 * loss.tau_r) * (1.0 + 1e-12) + 1e-300;
  };

  auto record = [&](double time, const State& s) {
    VectorXd u;
    const double pe = f.actuation_power(time, s.x, &u);
    pscale = std::max(pscale, std::abs(pe));
    double ps;
    if (loss.tau_r == kInf) {
      ps = 0.0;
    } else {
      const double x = std::min(1.0, 2.0 * loss.tau_r * pe / s.E);
      ps = 2.0 * pe / (1.0 + std::sqrt(1.0 - x));
    }
    const double vs = std::sqrt(2.0 * s.E / loss.C_s);
    const double us = -ps / vs;
    double pd = u.dot(loss.R.cwiseProduct(u));
    if (loss.tau_r != kInf && loss.tau_r > 0.0) pd += (loss.tau_r / loss.C_s) * us * us;
    if (!loss.leakless()) pd += (loss.C_s / loss.tau_s) * vs * vs;
    traj.t.push_back(time);
    traj.E_s.push_back(s.E);
    traj.P_e.push_back(pe);
    traj.P_s.push_back(ps);
    traj.P_d.push_back(pd);
    traj.u_s.push_back(us);
    traj.v_s.push_back(vs);
  };

  State s{VectorXd::Zero(dyn.n()), E_s0};
  double t = sig.t.front();
  const double t_end = sig.t.back();

  {
    double pe0;
    if (choked(t, s, &pe0)) {
      record(t, s);
      traj.choke = ChokeRecord{t, s.E, pe0};
      return traj;
    }
    record(t, s);
  }

  while (t < t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
    const double h = std::min(dt, t_end - t);
    double err = 0.0;
    const State next = rk4_pair(f, t, s, h, &err);
    if (err > 1e-4)
      throw StepTooLarge("simulate: step-doubling error " + std::to_string(err) +
                         " exceeds 1e-4 relative; reduce dt");
    double pe_next;
    if (choked(t + h, next, &pe_next)) {
      // bisect the event time within [t, t+h] to 1e-9 s
      double lo = 0.0, hi = h;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        double tmp_err;
        const State sm = rk4_pair(f, t, s, mid, &tmp_err);
        if (choked(t + mid, sm, nullptr))
          hi = mid;
        else
          lo = mid;
      }
      double dummy;
      const State se = rk4_pair(f, t, s, std::max(hi, 1e-12), &dummy);
      double pe_e;
      choked(t + hi, se, &pe_e);
      record(t + hi, {se.x, std::max(se.E, 1e-300)});
      traj.choke = ChokeRecord{t + hi, se.E, pe_e};
      return traj;
    }
    s = next;
    t += h;
    record(t, s);
  }
  return traj;
}

}  // namespace

EnergyTrajectory simulate(const LtiAdmittance& sys, const Signal& v, double E_s0,
                          const LossParams& loss, double dt) {
  sys.validate();
  Dynamics dyn;
  dyn.lti = &sys;
  return run(dyn, v, E_s0, loss, dt);
}

EnergyTrajectory simulate(const LtvAdmittanceGrid& sys, const Signal& v, double E_s0,
                          const LossParams& loss, double dt) {
  sys.validate();
  Dynamics dyn;
  dyn.ltv = &sys;
  return run(dyn, v, E_s0, loss, dt);
}

// ---------------------------------------------------------------------------
// CSV

Signal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open signal file: " + path);
  Signal s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double val;
    while (ls >> val) row.push_back(val);
    if (row.empty()) {
      if (lineno == 1) continue;  // header
      throw SchemaError("signal CSV: non-numeric line", "line " + std::to_string(lineno));
    }
    if (row.size() < 2)
      throw SchemaError("signal CSV: need t and at least one channel",
                        "line " + std::to_string(lineno));
    s.t.push_back(row[0]);
    VectorXd v(row.size() - 1);
    for (size_t i = 1; i < row.size(); ++i) v[i - 1] = row[i];
    s.v.push_back(v);
  }
  s.validate();
  return s;
}

void write_trajectory_csv(const std::string& path, const EnergyTrajectory& traj) {
  std::ostringstream out;
  out << "t,E_s,P_e,P_s,P_d,u_s,v_s,choke\n";
  out.precision(15);
  for (size_t k = 0; k < traj.size(); ++k) {
    const bool is_choke = traj.choke && k + 1 == traj.size();
    out << traj.t[k] << ',' << traj.E_s[k] << ',' << traj.P_e[k] << ',' << traj.P_s[k]
        << ',' << traj.P_d[k] << ',' << traj.u_s[k] << ',' << traj.v_s[k] << ','
        << (is_choke ? 1 : 0) << '\n';
  }
  write_file_atomic(path, out.str());
}

void write_ps_curve_csv(const std::string& path, double E_s, const LossParams& loss,
                        int points, double pe_lo) {
  if (!(E_s > 0.0) || points < 2) throw InvalidParameter("ps_curve: bad parameters");
  if (loss.tau_r == kInf || loss.tau_r == 0.0)
    throw InvalidParameter("ps_curve: needs finite tau_r > 0");
  const double pe_hi = E_s / (2.0 * loss.tau_r);
  std::ostringstream out;
  out << "P_e,P_s\n";
  out.precision(15);
  for (int i = 0; i < points; ++i) {
    const double pe = pe_lo + (pe_hi - pe_lo) * double(i) / double(points - 1);
    out << pe << ',' << storage_power(E_s, pe, loss) << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace spsa
