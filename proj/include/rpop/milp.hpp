#pragma once

#include <iosfwd>
#include <vector>

#include "rpop/lp.hpp"

namespace rpop::milp {

struct MixedIntegerProgram {
  lp::LinearProgram lp;
  std::vector<int> binary_vars;

  void validate() const;
};

enum class MipStatus { Optimal, Infeasible };

struct MipSolution {
  MipStatus status = MipStatus::Infeasible;
  std::vector<double> assignment;
  double objective = 0.0;
  double bound = 0.0;
  long node_count = 0;
};

struct MipOptions {
  double int_tol = 1e-6;
  double prune_tol = 1e-9;  // prune nodes with bound >= incumbent - prune_tol
  long node_limit = 1'000'000;
  lp::SimplexOptions lp_opt;
  std::ostream* log = nullptr;  // node log (iteration, bound, incumbent)
  /// Optional feasible assignment used as the starting incumbent; it is
  /// verified against the rows and bounds before being trusted.
  std::vector<double> initial_solution;
};

/// Branch and bound over the binary variables: best-bound node selection with
/// creation-index ties, branching on the most fractional binary (lowest index
/// on ties), down branch explored first. Deterministic for fixed input.
MipSolution solve_milp(const MixedIntegerProgram& mip, const MipOptions& opt = {});

}  // namespace rpop::milp
