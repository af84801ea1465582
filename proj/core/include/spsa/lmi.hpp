#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "spsa/types.hpp"

namespace spsa {

/// Dense symmetric matrix assembled from named row/column spans.
/// set(r, c, M) writes block (r,c) and mirrors M^T into (c,r); dense()
/// enforces the assembly invariant max|M - M^T| <= 1e-12 * max|M|.
class SymBlockMatrix {
 public:
  explicit SymBlockMatrix(const std::vector<std::pair<std::string, int>>& spans);

  int dim() const { return dim_; }
  void set(const std::string& row, const std::string& col, const MatrixXd& M);
  const MatrixXd& dense() const;

 private:
  struct Span {
    std::string name;
    int offset;
    int size;
  };
  const Span& span(const std::string& name) const;

  std::vector<Span> spans_;
  int dim_ = 0;
  MatrixXd M_;
};

/// Smallest eigenvalue of a symmetric matrix, via a dense self-adjoint
/// eigensolve. Input is symmetrized as (M + M^T)/2.
double min_eig(const MatrixXd& M);
double max_eig(const MatrixXd& M);

enum class ConstraintSense {
  NegSemidef,  // F(y) <= 0
  PosDef       // F(y) >= eps I
};

enum class FeasStatus { Feasible, Infeasible, Indeterminate };

const char* to_string(FeasStatus s);

/// Values of all decision variables, aligned with the problem's variable list.
using VarValues = std::vector<MatrixXd>;

/// Maps the values of a constraint's involved variables (in declaration
/// order) to the assembled constraint matrix. Must be affine.
using BlockAssembler = std::function<MatrixXd(const VarValues&)>;

/// Block-affine semidefinite feasibility problem:
/// constraints F_c(y) = F_{c,0} + sum_i y_i F_{c,i}, each either <= 0 or
/// >= eps I, over the free entries y of the declared matrix variables.
class LmiProblem {
 public:
  struct Variable {
    std::string name;
    int rows, cols;
    bool symmetric;
    int offset;  // first entry in the decision vector
    int count;   // number of free entries
  };

  struct Constraint {
    std::string name;
    ConstraintSense sense;
    std::vector<int> vars;
    BlockAssembler assemble;
    double eps;   // strictness shift for PosDef constraints
    int dim;
    double scale; // normalization: max |entry| over F0 and basis
    MatrixXd F0;
    std::vector<std::pair<int, MatrixXd>> basis;  // (decision index, dF/dy)
  };

  int add_symmetric(const std::string& name, int n);
  int add_matrix(const std::string& name, int rows, int cols);

  /// `vars` lists the involved variable indices; `f` receives their values in
  /// that order. eps is only meaningful for PosDef.
  void add_constraint(std::string name, ConstraintSense sense,
                      std::vector<int> vars, BlockAssembler f, double eps = 0.0);

  /// Extracts the affine representation (F0 + basis) of every constraint and
  /// checks symmetry. Must be called before solving; idempotent.
  void finalize();
  bool finalized() const { return finalized_; }

  int num_vars() const { return num_entries_; }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  VarValues zero_values() const;
  VarValues unpack(const VectorXd& y) const;
  VectorXd pack(const VarValues& values) const;

  /// Assembles constraint c at the given full variable values.
  MatrixXd assemble(int c, const VarValues& values) const;

 private:
  MatrixXd assemble_probe(size_t c, const VarValues& values) const;

  std::vector<Variable> vars_;
  std::vector<Constraint> constraints_;
  int num_entries_ = 0;
  bool finalized_ = false;
};

/// Feasibility certificate: variable values plus the eigenvalue margins they
/// reproduce. worst_eig is per constraint (lambda_max for <=0 constraints,
/// lambda_min for >=epsI ones); margin is the normalized most-violated
/// eigenvalue, sign convention: >= -tol means feasible.
struct Certificate {
  VarValues values;
  std::vector<double> worst_eig;
  double margin = 0.0;
};

struct SolveResult {
  FeasStatus status = FeasStatus::Indeterminate;
  Certificate certificate;
  double margin = 0.0;     // best achieved normalized margin
  double gap = 0.0;        // residual duality gap bound at exit
  int newton_iterations = 0;
  bool converged = false;
};

struct SolveOptions {
  double tol = 1e-7;       // verdict band half-width (normalized units)
  double box_bound = 1e6;  // search-region bound after problem scaling (ball radius 1e6 sqrt(m))
  int max_outer = 40;
  int max_newton_total = 20000;
};

/// Strictness shift for P > 0 constraints, implemented as P >= eps I. The
/// (n+1) factor keeps problems that are infeasible only through strictness
/// (e.g. a scalar Lyapunov inequality with unstable A) outside the
/// Indeterminate band |margin| < tol.
inline double strictness_eps(double tol, int n) { return 2.0 * tol * (n + 1); }

/// Max-margin feasibility solve. Feasible iff a decision vector is certified
/// with normalized margin >= tol; Infeasible iff the achieved margin plus the
/// residual gap is <= -tol; everything else (including iteration limits) is
/// reported as Indeterminate, never as a silent verdict.
SolveResult solve_feasibility(const LmiProblem& p, double tol = 1e-7);
SolveResult solve_feasibility(const LmiProblem& p, const SolveOptions& opt);

/// Independent certificate check: re-assembles every constraint at the given
/// values and recomputes eigenvalues. Holds no solver state.
struct VerifyReport {
  std::vector<double> worst_eig;  // true-scale, per constraint
  double margin = 0.0;            // normalized most-violated eigenvalue
};
VerifyReport verify(const LmiProblem& p, const VarValues& values);

}  // namespace spsa
