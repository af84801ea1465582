#include "spsa/lmi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "spsa/errors.hpp"

namespace spsa {

// ---------------------------------------------------------------------------
// SymBlockMatrix

SymBlockMatrix::SymBlockMatrix(const std::vector<std::pair<std::string, int>>& spans) {
  int off = 0;
  for (const auto& [name, size] : spans) {
    if (size < 0) throw DimensionMismatch("block span '" + name + "' has negative size");
    spans_.push_back({name, off, size});
    off += size;
  }
  dim_ = off;
  M_ = MatrixXd::Zero(dim_, dim_);
}

const SymBlockMatrix::Span& SymBlockMatrix::span(const std::string& name) const {
  for (const auto& s : spans_)
    if (s.name == name) return s;
  throw DimensionMismatch("unknown block span '" + name + "'");
}

void SymBlockMatrix::set(const std::string& row, const std::string& col, const MatrixXd& M) {
  const Span& r = span(row);
  const Span& c = span(col);
  if (M.rows() != r.size || M.cols() != c.size)
    throw DimensionMismatch("block (" + row + "," + col + ") has wrong shape");
  M_.block(r.offset, c.offset, r.size, c.size) = M;
  if (r.offset != c.offset) M_.block(c.offset, r.offset, c.size, r.size) = M.transpose();
}

const MatrixXd& SymBlockMatrix::dense() const {
  const double scale = M_.size() ? M_.cwiseAbs().maxCoeff() : 0.0;
  const double asym = M_.size() ? (M_ - M_.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-12 * std::max(scale, 1e-300))
    throw InvalidParameter("assembled block matrix is not symmetric");
  return M_;
}

// ---------------------------------------------------------------------------
// Eigenvalue helpers

double min_eig(const MatrixXd& M) {
  if (M.rows() != M.cols()) throw DimensionMismatch("min_eig: matrix not square");
  if (M.rows() == 0) return 0.0;
  const MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig(const MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  return -min_eig(-M);
}

const char* to_string(FeasStatus s) {
  switch (s) {
    case FeasStatus::Feasible: return "feasible";
    case FeasStatus::Infeasible: return "infeasible";
    default: return "indeterminate";
  }
}

// ---------------------------------------------------------------------------
// LmiProblem

int LmiProblem::add_symmetric(const std::string& name, int n) {
  if (n < 0) throw DimensionMismatch("variable '" + name + "' has negative size");
  Variable v{name, n, n, true, num_entries_, n * (n + 1) / 2};
  vars_.push_back(v);
  num_entries_ += v.count;
  finalized_ = false;
  return static_cast<int>(vars_.size()) - 1;
}

int LmiProblem::add_matrix(const std::string& name, int rows, int cols) {
  if (rows < 0 || cols < 0) throw DimensionMismatch("variable '" + name + "' has negative size");
  Variable v{name, rows, cols, false, num_entries_, rows * cols};
  vars_.push_back(v);
  num_entries_ += v.count;
  finalized_ = false;
  return static_cast<int>(vars_.size()) - 1;
}

void LmiProblem::add_constraint(std::string name, ConstraintSense sense,
                                std::vector<int> vars, BlockAssembler f, double eps) {
  for (int v : vars)
    if (v < 0 || v >= static_cast<int>(vars_.size()))
      throw DimensionMismatch("constraint '" + name + "' references unknown variable");
  Constraint c;
  c.name = std::move(name);
  c.sense = sense;
  c.vars = std::move(vars);
  c.assemble = std::move(f);
  c.eps = eps;
  c.dim = 0;
  c.scale = 1.0;
  constraints_.push_back(std::move(c));
  finalized_ = false;
}

VarValues LmiProblem::zero_values() const {
  VarValues v;
  v.reserve(vars_.size());
  for (const auto& var : vars_) v.push_back(MatrixXd::Zero(var.rows, var.cols));
  return v;
}

VarValues LmiProblem::unpack(const VectorXd& y) const {
  if (y.size() != num_entries_) throw DimensionMismatch("unpack: wrong decision vector length");
  VarValues out = zero_values();
  for (size_t v = 0; v < vars_.size(); ++v) {
    const Variable& var = vars_[v];
    int k = var.offset;
    if (var.symmetric) {
      for (int i = 0; i < var.rows; ++i)
        for (int j = i; j < var.cols; ++j) {
          out[v](i, j) = y[k];
          out[v](j, i) = y[k];
          ++k;
        }
    } else {
      for (int i = 0; i < var.rows; ++i)
        for (int j = 0; j < var.cols; ++j) out[v](i, j) = y[k++];
    }
  }
  return out;
}

VectorXd LmiProblem::pack(const VarValues& values) const {
  if (values.size() != vars_.size()) throw DimensionMismatch("pack: wrong value count");
  VectorXd y(num_entries_);
  for (size_t v = 0; v < vars_.size(); ++v) {
    const Variable& var = vars_[v];
    if (values[v].rows() != var.rows || values[v].cols() != var.cols)
      throw DimensionMismatch("pack: value shape mismatch for '" + var.name + "'");
    int k = var.offset;
    if (var.symmetric) {
      for (int i = 0; i < var.rows; ++i)
        for (int j = i; j < var.cols; ++j) y[k++] = values[v](i, j);
    } else {
      for (int i = 0; i < var.rows; ++i)
        for (int j = 0; j < var.cols; ++j) y[k++] = values[v](i, j);
    }
  }
  return y;
}

MatrixXd LmiProblem::assemble(int c, const VarValues& values) const {
  const Constraint& con = constraints_.at(c);
  VarValues local;
  local.reserve(con.vars.size());
  for (int v : con.vars) local.push_back(values[v]);
  MatrixXd F = con.assemble(local);
  if (F.rows() != F.cols()) throw DimensionMismatch("constraint '" + con.name + "' not square");
  return F;
}

void LmiProblem::finalize() {
  if (finalized_) return;
  const VarValues zeros = zero_values();
  for (size_t ci = 0; ci < constraints_.size(); ++ci) {
    Constraint& con = constraints_[ci];
    MatrixXd F0 = assemble(static_cast<int>(ci), zeros);
    con.dim = static_cast<int>(F0.rows());
    if ((F0 - F0.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(F0.cwiseAbs().maxCoeff(), 1.0))
      throw InvalidParameter("constraint '" + con.name + "': F0 not symmetric");
    con.F0 = 0.5 * (F0 + F0.transpose());
    con.basis.clear();
    double scale = con.F0.size() ? con.F0.cwiseAbs().maxCoeff() : 0.0;

    VarValues probe = zeros;
    for (int v : con.vars) {
      const Variable& var = vars_[v];
      int k = var.offset;
      auto probe_entry = [&](int i, int j) {
        probe[v](i, j) = 1.0;
        if (var.symmetric) probe[v](j, i) = 1.0;
        MatrixXd Fi = assemble_probe(ci, probe) - con.F0;
        probe[v].setZero();
        if ((Fi - Fi.transpose()).cwiseAbs().maxCoeff() >
            1e-12 * std::max(Fi.cwiseAbs().maxCoeff(), 1.0))
          throw InvalidParameter("constraint '" + con.name + "': basis not symmetric");
        Fi = 0.5 * (Fi + Fi.transpose());
        if (Fi.cwiseAbs().maxCoeff() > 0.0) {
          scale = std::max(scale, Fi.cwiseAbs().maxCoeff());
          con.basis.emplace_back(k, std::move(Fi));
        }
        ++k;
      };
      if (var.symmetric) {
        for (int i = 0; i < var.rows; ++i)
          for (int j = i; j < var.cols; ++j) probe_entry(i, j);
      } else {
        for (int i = 0; i < var.rows; ++i)
          for (int j = 0; j < var.cols; ++j) probe_entry(i, j);
      }
    }
    con.scale = std::max(scale, 1e-300);
  }
  finalized_ = true;
}

MatrixXd LmiProblem::assemble_probe(size_t c, const VarValues& values) const {
  const Constraint& con = constraints_[c];
  VarValues local;
  local.reserve(con.vars.size());
  for (int v : con.vars) local.push_back(values[v]);
  return con.assemble(local);
}

// ---------------------------------------------------------------------------
// Verification (assemble + eigenvalues only; no solver state)

namespace {

double violation(const LmiProblem::Constraint& con, const MatrixXd& F, double* worst_eig) {
  if (con.sense == ConstraintSense::NegSemidef) {
    const double l = max_eig(F);
    if (worst_eig) *worst_eig = l;
    return l / con.scale;
  }
  const double l = min_eig(F);
  if (worst_eig) *worst_eig = l;
  return (con.eps - l) / con.scale;
}

}  // namespace

VerifyReport verify(const LmiProblem& p, const VarValues& values) {
  if (!p.finalized()) throw InvalidParameter("verify: problem not finalized");
  VerifyReport rep;
  rep.worst_eig.resize(p.num_constraints());
  double worst = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < p.num_constraints(); ++c) {
    const MatrixXd F = p.assemble(c, values);
    worst = std::max(worst, violation(p.constraints()[c], F, &rep.worst_eig[c]));
  }
  rep.margin = -worst;
  return rep;
}

// ---------------------------------------------------------------------------
// Max-margin interior-point solver
//
//   maximize t   s.t.   Fhat_c(y) + t I <= 0  for all c,   |y_i| <= B
//
// with Fhat each constraint in normalized violation form (NegSemidef: F/scale;
// PosDef: (eps I - F)/scale). The optimum t is the best achievable normalized
// margin; its sign decides feasibility. Log-det barrier path following with
// damped Newton centering. The Hessian over y is block-banded (variables only
// interact inside a constraint); the t column is dense and handled as an
// arrow via a Schur complement on top of a banded Cholesky.

namespace {

struct NormConstraint {
  MatrixXd F0;
  std::vector<std::pair<int, MatrixXd>> basis;
  int dim = 0;
};

struct Workspace {
  std::vector<NormConstraint> cons;
  int m = 0;
  double rho2 = 0.0;  // ball bound: ||y||_2^2 < rho2 (contains the ||y||_inf box)
  int bandwidth = 0;
};

bool factor_slacks(const Workspace& ws, const VectorXd& y, double t,
                   std::vector<Eigen::LLT<MatrixXd>>& llts) {
  llts.resize(ws.cons.size());
  for (size_t c = 0; c < ws.cons.size(); ++c) {
    const auto& con = ws.cons[c];
    MatrixXd S = -con.F0;
    for (const auto& [idx, Fi] : con.basis) S.noalias() -= y[idx] * Fi;
    S.diagonal().array() -= t;
    llts[c].compute(S);
    if (llts[c].info() != Eigen::Success) return false;
  }
  return true;
}

// -kappa*t + barrier; ok=false when (y,t) is outside the domain.
double merit(const Workspace& ws, double kappa, const VectorXd& y, double t, bool* ok) {
  *ok = false;
  const double ball = ws.rho2 - y.squaredNorm();
  if (!(ball > 0.0)) return 0.0;
  std::vector<Eigen::LLT<MatrixXd>> llts;
  if (!factor_slacks(ws, y, t, llts)) return 0.0;
  double phi = -std::log(ball);
  for (const auto& llt : llts) {
    const auto& L = llt.matrixLLT();
    for (int i = 0; i < L.rows(); ++i) phi -= 2.0 * std::log(L(i, i));
  }
  *ok = true;
  return -kappa * t + phi;
}

// In-place banded Cholesky (lower triangle, bw sub-diagonals).
bool banded_cholesky(MatrixXd& H, int bw) {
  const int m = static_cast<int>(H.rows());
  for (int j = 0; j < m; ++j) {
    double d = H(j, j);
    for (int k = std::max(0, j - bw); k < j; ++k) d -= H(j, k) * H(j, k);
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    H(j, j) = d;
    const int iend = std::min(m, j + bw + 1);
    for (int i = j + 1; i < iend; ++i) {
      double v = H(i, j);
      for (int k = std::max({0, i - bw, j - bw}); k < j; ++k) v -= H(i, k) * H(j, k);
      H(i, j) = v / d;
    }
  }
  return true;
}

void banded_solve(const MatrixXd& L, int bw, VectorXd& x) {
  const int m = static_cast<int>(L.rows());
  for (int i = 0; i < m; ++i) {
    double v = x[i];
    for (int k = std::max(0, i - bw); k < i; ++k) v -= L(i, k) * x[k];
    x[i] = v / L(i, i);
  }
  for (int i = m - 1; i >= 0; --i) {
    double v = x[i];
    const int kend = std::min(m, i + bw + 1);
    for (int k = i + 1; k < kend; ++k) v -= L(k, i) * x[k];
    x[i] = v / L(i, i);
  }
}

}  // namespace

SolveResult solve_feasibility(const LmiProblem& p, double tol) {
  SolveOptions opt;
  opt.tol = tol;
  return solve_feasibility(p, opt);
}

SolveResult solve_feasibility(const LmiProblem& problem, const SolveOptions& opt) {
  if (!(opt.tol > 0.0)) throw InvalidParameter("solve_feasibility: tol must be > 0");
  if (problem.num_constraints() == 0)
    throw InvalidParameter("solve_feasibility: problem has no constraints");
  // finalize() is idempotent and the only mutation; the logical problem is untouched.
  LmiProblem& p = const_cast<LmiProblem&>(problem);
  p.finalize();

  SolveResult res;
  const double tol = opt.tol;

  auto classify = [&](double margin, double gap, bool centered) {
    if (margin >= tol) return FeasStatus::Feasible;
    if (centered && margin + gap <= -tol) return FeasStatus::Infeasible;
    return FeasStatus::Indeterminate;
  };

  // Constant problem: the verdict is a pure eigenvalue computation.
  if (p.num_vars() == 0) {
    const VarValues vals = p.zero_values();
    const VerifyReport rep = verify(p, vals);
    res.certificate = {vals, rep.worst_eig, rep.margin};
    res.margin = rep.margin;
    res.converged = true;
    res.status = classify(rep.margin, 0.0, true);
    return res;
  }

  Workspace ws;
  ws.m = p.num_vars();
  ws.rho2 = opt.box_bound * opt.box_bound * double(ws.m);
  double nu = 2.0;  // ball barrier
  for (const auto& con : p.constraints()) {
    NormConstraint nc;
    nc.dim = con.dim;
    if (con.sense == ConstraintSense::NegSemidef) {
      nc.F0 = con.F0 / con.scale;
      for (const auto& [idx, Fi] : con.basis) nc.basis.emplace_back(idx, Fi / con.scale);
    } else {
      nc.F0 = -con.F0 / con.scale;
      nc.F0.diagonal().array() += con.eps / con.scale;
      for (const auto& [idx, Fi] : con.basis) nc.basis.emplace_back(idx, -Fi / con.scale);
    }
    nu += nc.dim;
    int lo = ws.m, hi = 0;
    for (const auto& [idx, Fi] : nc.basis) {
      (void)Fi;
      lo = std::min(lo, idx);
      hi = std::max(hi, idx);
    }
    if (!nc.basis.empty()) ws.bandwidth = std::max(ws.bandwidth, hi - lo);
    ws.cons.push_back(std::move(nc));
  }
  ws.bandwidth = std::min(ws.bandwidth, ws.m - 1);

  VectorXd y = VectorXd::Zero(ws.m);
  double t;
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& con : ws.cons) worst = std::max(worst, max_eig(con.F0));
    t = -worst - 1.0;
  }

  auto report = [&](double gap, bool centered) {
    const VarValues vals = p.unpack(y);
    const VerifyReport rep = verify(p, vals);
    res.certificate = {vals, rep.worst_eig, rep.margin};
    res.margin = rep.margin;
    res.gap = gap;
    res.converged = centered;
    res.status = classify(rep.margin, gap, centered);
  };

  MatrixXd H(ws.m, ws.m);
  VectorXd grad_y(ws.m), h_yt(ws.m);
  std::vector<Eigen::LLT<MatrixXd>> llts;
  std::vector<MatrixXd> SiFiSi;

  double kappa = 1.0;
  const double gap_target = 0.05 * tol;
  int newton_total = 0;
  const bool debug = std::getenv("SPSA_LMI_DEBUG") != nullptr;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    bool centered = false;
    int stage_iters = 0;
    double last_decr = 0.0;
    const char* stop_reason = "iter_cap";
    for (int it = 0; it < 600; ++it) {
      stage_iters = it + 1;
      if (++newton_total > opt.max_newton_total) {
        stop_reason = "newton_budget";
        break;
      }
      if (!factor_slacks(ws, y, t, llts)) {
        stop_reason = "lost_interior";
        break;
      }

      H.setZero();
      grad_y.setZero();
      h_yt.setZero();
      double grad_t = -kappa;
      double h_tt = 0.0;
      for (size_t c = 0; c < ws.cons.size(); ++c) {
        const auto& con = ws.cons[c];
        const int nb = static_cast<int>(con.basis.size());
        const MatrixXd Sinv = llts[c].solve(MatrixXd::Identity(con.dim, con.dim));
        SiFiSi.resize(nb);
        for (int a = 0; a < nb; ++a) {
          const auto& [idx, Fi] = con.basis[a];
          SiFiSi[a].noalias() = Sinv * Fi * Sinv;
          grad_y[idx] += Sinv.cwiseProduct(Fi).sum();  // tr(S^-1 F_i)
          h_yt[idx] += SiFiSi[a].trace();              // tr(S^-1 F_i S^-1)
        }
        for (int a = 0; a < nb; ++a) {
          const int ia = con.basis[a].first;
          for (int b = a; b < nb; ++b) {
            const int ib = con.basis[b].first;
            H(std::max(ia, ib), std::min(ia, ib)) +=
                SiFiSi[a].cwiseProduct(con.basis[b].second).sum();
          }
        }
        grad_t += Sinv.trace();
        h_tt += Sinv.squaredNorm();  // tr(S^-2)
      }
      // ball barrier -log(rho2 - ||y||^2): banded diagonal part plus a
      // rank-one term handled by Sherman-Morrison in the solve below
      const double ball = ws.rho2 - y.squaredNorm();
      if (!(ball > 0.0)) {
        stop_reason = "lost_interior";
        break;
      }
      grad_y += (2.0 / ball) * y;
      H.diagonal().array() += 2.0 / ball;
      const double beta = 4.0 / (ball * ball);

      VectorXd dy(ws.m);
      double dt;
      {
        MatrixXd Hc = H;
        double ridge = 0.0;
        bool ok = banded_cholesky(Hc, ws.bandwidth);
        while (!ok && ridge < 1e8) {
          ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, H.diagonal().maxCoeff()) : ridge * 100;
          Hc = H;
          Hc.diagonal().array() += ridge;
          ok = banded_cholesky(Hc, ws.bandwidth);
        }
        if (!ok) {
          stop_reason = "hessian_factor";
          break;
        }
        // A = H_banded + beta y y^T; solve A u = -grad_y, A w = h_yt
        VectorXd by = y;
        banded_solve(Hc, ws.bandwidth, by);  // H^-1 y
        const double sm_denom = 1.0 + beta * y.dot(by);
        auto solveA = [&](VectorXd r) {
          banded_solve(Hc, ws.bandwidth, r);
          r -= (beta * y.dot(r) / sm_denom) * by;
          return r;
        };
        const VectorXd u = solveA(-grad_y);
        const VectorXd w = solveA(h_yt);
        const double denom = h_tt - h_yt.dot(w);
        if (!(denom > 0.0)) {
          stop_reason = "schur_nonpos";
          break;
        }
        dt = (-grad_t - h_yt.dot(u)) / denom;
        dy = u - w * dt;
      }

      const double decr2 = -(grad_y.dot(dy) + grad_t * dt);
      last_decr = decr2;
      if (!(decr2 > 0.0) || std::sqrt(decr2) < 1e-6) {
        centered = true;
        stop_reason = "centered";
        break;
      }

      bool ok0 = false;
      const double psi0 = merit(ws, kappa, y, t, &ok0);
      double alpha = 1.0;
      bool stepped = false;
      for (int ls = 0; ls < 60; ++ls) {
        bool okn = false;
        const VectorXd yn = y + alpha * dy;
        const double tn = t + alpha * dt;
        const double psin = merit(ws, kappa, yn, tn, &okn);
        if (okn && psin <= psi0 - 0.01 * alpha * decr2) {
          y = yn;
          t = tn;
          stepped = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!stepped) {  // line search stalled
        stop_reason = "linesearch";
        break;
      }
    }

    const double gap = nu / kappa;
    const VerifyReport rep = verify(p, p.unpack(y));
    if (debug)
      std::fprintf(stderr,
                   "[lmi] outer=%d kappa=%.3e iters=%d stop=%s decr2=%.3e t=%.6e "
                   "margin=%.6e gap=%.3e\n",
                   outer, kappa, stage_iters, stop_reason, last_decr, t, rep.margin, gap);
    res.newton_iterations = newton_total;
    if (rep.margin >= tol ||
        (centered && rep.margin + gap <= -tol) ||
        (centered && gap <= gap_target) ||
        !centered || newton_total > opt.max_newton_total) {
      report(gap, centered);
      return res;
    }
    kappa *= 10.0;
  }

  report(nu / kappa, false);
  return res;
}

}  // namespace spsa
