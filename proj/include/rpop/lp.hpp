#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rpop/common.hpp"

namespace rpop::lp {

struct Entry {
  int col = 0;
  double val = 0.0;
};

enum class Sense : char { LE = 'L', EQ = 'E', GE = 'G' };

struct Row {
  std::vector<Entry> coeffs;
  Sense sense = Sense::LE;
  double rhs = 0.0;
  std::string tag;
  /// Lazy rows may be left out of a solve until violated; excluded rows are
  /// inactive at the reported optimum and carry zero duals.
  bool lazy = false;
};

/// Sparse linear program: min c'x + const over lo <= x <= hi subject to rows.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<Row> rows;
  std::vector<std::string> var_tags;

  int add_var(double lo, double hi, double cost, std::string tag = {});
  int add_row(Row r);
  int add_row(std::vector<Entry> coeffs, Sense sense, double rhs, std::string tag = {},
              bool lazy = false);

  /// Throws SolveError on malformed structure (bad indices, lo > hi,
  /// non-finite coefficients).
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Dual convention: duals[r] is the derivative of the optimal value with
/// respect to rows[r].rhs. For a minimization this makes duals of binding
/// <= rows nonpositive and of >= rows nonnegative.
struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  std::vector<double> primal;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  /// Infeasible: row multipliers y with min over bounds of (y'A)x > y'b.
  std::vector<double> farkas;
  /// Unbounded: improving feasible direction over the structural variables.
  std::vector<double> ray;
  long iterations = 0;
};

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, FreeNonbasic };

/// Basis snapshot over structural variables followed by one slack per row.
struct Basis {
  std::vector<VarStatus> status;
  bool empty() const { return status.empty(); }
};

/// Reusable warm start: the active row set, the basis over it and the dense
/// basis inverse, so a re-solve of a structurally identical program (same
/// rows, possibly different bounds or rhs) skips refactorization.
struct WarmCapsule {
  int num_vars = 0;
  std::vector<int> active_rows;
  std::vector<VarStatus> status;  // structural vars then active-row slacks
  std::vector<double> binv;       // row-major, active x active
  bool empty() const { return status.empty(); }
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double cert_tol = 1e-7;
  int bland_after = 500;     // degenerate pivots before switching to Bland's rule
  long max_iters = 0;        // 0 = automatic (scales with problem size)
  int refactor_every = 400;  // pivots between basis refactorizations
  bool use_lazy_rows = true;
};

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {});

/// Warm-start variant. `warm` may be null or stale (it is repaired or
/// discarded); when `out_basis` is non-null the final basis is stored there.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt, const Basis* warm,
                    Basis* out_basis);

/// Capsule warm start: reuses the stored basis inverse when it still matches
/// the program, avoiding an O(m^3) refactorization per solve.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt, const WarmCapsule* warm,
                    WarmCapsule* out_capsule);

struct DualCheckReport {
  bool pass = false;
  double worst_primal_residual = 0.0;
  double worst_dual_residual = 0.0;
  double worst_complementarity = 0.0;
  double duality_gap = 0.0;
};

/// Verifies primal feasibility, dual sign conditions, complementary slackness
/// and the primal-dual objective gap of an Optimal solution.
DualCheckReport dual_check(const LinearProgram& lp, const LpSolution& sol, double tol = 1e-7);

/// Human-readable dump (one row per line) for external cross-checking.
void dump(const LinearProgram& lp, std::ostream& os);

}  // namespace rpop::lp
