#include "rpop/milp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <set>

namespace rpop::milp {

void MixedIntegerProgram::validate() const {
  lp.validate();
  for (int j : binary_vars) {
    if (j < 0 || j >= lp.num_vars) throw SolveError("milp: binary index out of range");
    if (lp.lower[j] < -1e-12 || lp.upper[j] > 1.0 + 1e-12)
      throw SolveError("milp: binary variable " + std::to_string(j) + " has bounds outside [0,1]");
  }
}

namespace {

struct Node {
  std::vector<std::pair<int, char>> fixings;  // (var, value) from the root
  double bound;                               // parent relaxation objective
  long created;
};

struct NodeOrder {
  bool operator()(const Node* a, const Node* b) const {
    if (a->bound != b->bound) return a->bound < b->bound;
    // Ties go to the most recently created node, so equal-bound stretches
    // dive (and the down branch, pushed last, is explored first).
    return a->created > b->created;
  }
};

}  // namespace

MipSolution solve_milp(const MixedIntegerProgram& mip, const MipOptions& opt) {
  mip.validate();

  std::vector<int> binaries = mip.binary_vars;
  std::sort(binaries.begin(), binaries.end());

  lp::LinearProgram scratch = mip.lp;
  auto apply_fixings = [&](const std::vector<std::pair<int, char>>& fixings) {
    for (auto [var, val] : fixings) {
      scratch.lower[var] = val;
      scratch.upper[var] = val;
    }
  };
  auto undo_fixings = [&](const std::vector<std::pair<int, char>>& fixings) {
    for (auto [var, val] : fixings) {
      (void)val;
      scratch.lower[var] = mip.lp.lower[var];
      scratch.upper[var] = mip.lp.upper[var];
    }
  };

  std::vector<std::unique_ptr<Node>> storage;
  std::multiset<Node*, NodeOrder> open;
  long created = 0;
  auto push_node = [&](std::vector<std::pair<int, char>> fixings, double bound) {
    auto node = std::make_unique<Node>();
    node->fixings = std::move(fixings);
    node->bound = bound;
    node->created = created++;
    open.insert(node.get());
    storage.push_back(std::move(node));
  };
  push_node({}, -kInf);

  // Nodes warm-start from whichever of the root capsule and the most recent
  // capsule is closer in fixing distance; both skip refactorization.
  lp::WarmCapsule capsule, root_capsule;
  std::vector<std::pair<int, char>> last_fixings;
  bool have_capsule = false;

  bool have_incumbent = false;
  std::vector<double> incumbent;
  double incumbent_obj = kInf;
  double global_bound = -kInf;
  long nodes_processed = 0;

  if (!opt.initial_solution.empty()) {
    if (static_cast<int>(opt.initial_solution.size()) != mip.lp.num_vars)
      throw SolveError("milp: initial solution has the wrong size");
    const auto& x0 = opt.initial_solution;
    for (int j = 0; j < mip.lp.num_vars; ++j)
      if (x0[j] < mip.lp.lower[j] - 1e-7 || x0[j] > mip.lp.upper[j] + 1e-7)
        throw SolveError("milp: initial solution violates variable bounds");
    for (const auto& row : mip.lp.rows) {
      double act = 0.0;
      for (const auto& e : row.coeffs) act += e.val * x0[e.col];
      double scale = 1.0 + std::abs(row.rhs);
      bool ok = true;
      switch (row.sense) {
        case lp::Sense::LE: ok = act <= row.rhs + 1e-7 * scale; break;
        case lp::Sense::GE: ok = act >= row.rhs - 1e-7 * scale; break;
        case lp::Sense::EQ: ok = std::abs(act - row.rhs) <= 1e-7 * scale; break;
      }
      if (!ok) throw SolveError("milp: initial solution violates row " + row.tag);
    }
    for (int j : binaries) {
      double v = x0[j];
      if (std::abs(v - std::round(v)) > opt.int_tol)
        throw SolveError("milp: initial solution is not integral");
    }
    incumbent = x0;
    for (int j : binaries) incumbent[j] = std::round(incumbent[j]);
    incumbent_obj = mip.lp.objective_constant;
    for (int j = 0; j < mip.lp.num_vars; ++j)
      incumbent_obj += mip.lp.objective[j] * incumbent[j];
    have_incumbent = true;
  }

  while (!open.empty()) {
    auto it = open.begin();
    Node* node = *it;
    open.erase(it);

    // Popped bounds are non-decreasing under best-bound selection.
    global_bound = std::max(global_bound, node->bound);

    if (have_incumbent && node->bound >= incumbent_obj - opt.prune_tol) continue;

    if (++nodes_processed > opt.node_limit)
      throw SolveError("milp: node limit exceeded; incumbent=" +
                       (have_incumbent ? std::to_string(incumbent_obj) : std::string("none")) +
                       " bound=" + std::to_string(global_bound));

    apply_fixings(node->fixings);
    lp::LpSolution rel;
    try {
      lp::WarmCapsule next;
      rel = lp::solve_lp(scratch, opt.lp_opt,
                         have_capsule && !capsule.empty() ? &capsule : nullptr, &next);
      if (!next.empty()) capsule = std::move(next);
      have_capsule = true;
    } catch (...) {
      undo_fixings(node->fixings);
      throw;
    }
    undo_fixings(node->fixings);

    if (rel.status == lp::LpStatus::Unbounded) throw SolveError("milp: relaxation unbounded");

    if (opt.log != nullptr)
      (*opt.log) << "node " << nodes_processed << " bound " << global_bound << " relax "
                 << (rel.status == lp::LpStatus::Optimal ? std::to_string(rel.objective)
                                                         : std::string("infeasible"))
                 << " iters " << rel.iterations << " depth " << node->fixings.size()
                 << " incumbent "
                 << (have_incumbent ? std::to_string(incumbent_obj) : std::string("-")) << "\n";

    if (rel.status == lp::LpStatus::Infeasible) continue;
    if (have_incumbent && rel.objective >= incumbent_obj - opt.prune_tol) continue;

    // Branch on the most fractional binary; ties go to the lowest index.
    int branch_var = -1;
    double best_dist = opt.int_tol;
    for (int j : binaries) {
      double v = rel.primal[j];
      double dist = std::min(std::abs(v), std::abs(1.0 - v));
      if (dist > best_dist + 1e-12) {
        best_dist = dist;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      incumbent_obj = rel.objective;
      incumbent = rel.primal;
      for (int j : binaries) incumbent[j] = std::round(incumbent[j]);
      have_incumbent = true;
      if (opt.log != nullptr) (*opt.log) << "incumbent " << incumbent_obj << "\n";
      continue;
    }

    // The down branch is pushed last so it pops first on bound ties.
    auto up = node->fixings;
    up.emplace_back(branch_var, 1);
    push_node(std::move(up), rel.objective);
    auto down = node->fixings;
    down.emplace_back(branch_var, 0);
    push_node(std::move(down), rel.objective);
  }

  MipSolution result;
  result.node_count = nodes_processed;
  if (!have_incumbent) {
    result.status = MipStatus::Infeasible;
    result.bound = kInf;
    return result;
  }
  result.status = MipStatus::Optimal;
  result.assignment = std::move(incumbent);
  result.objective = incumbent_obj;
  result.bound = incumbent_obj;
  return result;
}

}  // namespace rpop::milp
