#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rpop/formulation.hpp"

namespace rpop::robust {

/// Box of admissible load values. Uncertain loads are listed in load-id
/// order; every other load is pinned at its nominal value.
struct UncertaintySet {
  std::vector<int> uncertain;  // load indices, sorted by load id
  std::vector<std::array<PQ, 3>> lower;
  std::vector<std::array<PQ, 3>> upper;
  std::vector<std::array<PQ, 3>> nominal;
  std::optional<double> level;

  /// Bounds from the case file, or rescaled to nominal*(1 +- level) for the
  /// uncertain loads when a level is given.
  static UncertaintySet from_case(const NetworkCase& net, std::optional<double> level = {});

  /// Width of the box (zero when every uncertain load is degenerate).
  double max_width() const;
};

/// One vertex of the uncertainty box: per uncertain load either the upper or
/// the lower bound; loads of de-energized blocks carry neither flag.
struct ExtremeScenario {
  int id = -1;
  std::vector<char> zeta_plus;   // aligned with UncertaintySet::uncertain
  std::vector<char> zeta_minus;
};

/// Load realization of a scenario. Unflagged uncertain loads (de-energized
/// at the generating first-stage point) take their lower bound, which keeps
/// the extracted cuts valid if a later master energizes those blocks.
form::LoadVector realize(const NetworkCase& net, const UncertaintySet& u,
                         const ExtremeScenario& sc);

/// Realization from one uniform scalar per uncertain load in [0, 1].
form::LoadVector realize_sample(const NetworkCase& net, const UncertaintySet& u,
                                const std::vector<double>& t);

/// All distinct box vertices over the uncertain loads in energized blocks, in
/// lexicographic id order. Throws when their count exceeds the cap.
std::vector<ExtremeScenario> enumerate_extremes(const UncertaintySet& u,
                                                const std::vector<char>& z_bl,
                                                const NetworkCase& net, int scenario_cap = 20);

/// Re-solvable recourse problem bound to one first-stage point. Loads can be
/// swapped between solves; warm starts reuse a fixed reference basis so
/// results are independent of scheduling.
class RecourseEvaluator {
public:
  RecourseEvaluator(const NetworkCase& net, const form::MasterSolution& x,
                    const form::FormulationOptions& opt);

  struct Result {
    double objective = 0.0;
    double slack = 0.0;
    lp::LpSolution sol;
  };

  /// Cold solve that also installs the reference warm start.
  Result solve_reference(const form::LoadVector& loads);

  void set_reference_basis(const lp::WarmCapsule& capsule);
  const lp::WarmCapsule& reference_basis() const { return reference_; }

  /// Warm solve from the reference basis.
  Result evaluate(const form::LoadVector& loads);

  const form::RecourseModel& model() const { return rm_; }
  form::RecourseModel& model() { return rm_; }

private:
  const NetworkCase& net_;
  form::RecourseModel rm_;
  lp::WarmCapsule reference_;
  bool has_reference_ = false;
  lp::SimplexOptions sopt_;
};

struct ScenarioOutcome {
  int id = -1;
  double v2 = 0.0;
  double slack = 0.0;
  std::vector<std::array<PQ, 3>> o_up;  // per generator per phase (.p/.q parts)
  std::vector<std::array<PQ, 3>> o_dn;
};

struct WorstCaseResult {
  ExtremeScenario worst;
  double v2 = 0.0;
  double slack = 0.0;
  int subproblem_solves = 0;
  std::vector<ScenarioOutcome> outcomes;
  form::CutRecord cut;  // extracted at the worst scenario
};

struct RobustConfig {
  double epsilon = 1e-4;       // convergence threshold on total slack
  double opt_gap_rel = 1e-7;   // relative gap between theta and the recourse value
  int max_iterations = 200;
  int scenario_cap = 20;
  int threads = 0;             // 0 = hardware
  bool fix_topology = false;   // pin switches to their normally_closed state
  long milp_node_limit = 1'000'000;
  form::FormulationOptions form;
  std::ostream* log = nullptr;
  std::ostream* milp_log = nullptr;
  std::string dump_dir;  // when set, write each master and worst subproblem
};

/// Solves every extreme-scenario recourse problem at x and returns the one
/// with the largest objective (ties to the lowest scenario id), together
/// with per-scenario adjustment policies and the sub-gradient cut.
WorstCaseResult worst_case(const NetworkCase& net, const form::MasterSolution& x,
                           const UncertaintySet& u, const RobustConfig& cfg);

struct IterationLog {
  int k = 0;
  double master_objective = 0.0;
  double theta = 0.0;
  int worst_scenario = -1;
  double v2 = 0.0;
  double slack = 0.0;
  int scenario_solves = 0;
  double seconds = 0.0;
};

enum class RpopStatus { Converged, IterationLimit };

struct RpopSolution {
  RpopStatus status = RpopStatus::IterationLimit;
  form::MasterSolution x;
  std::vector<form::CutRecord> cuts;
  std::vector<IterationLog> logs;
  std::vector<ScenarioOutcome> recourse;  // policies for every extreme scenario
  double certificate_max_slack = 0.0;     // over all extremes at the final x
  int certificate_scenarios = 0;
  double objective = 0.0;                 // master objective incl. theta
};

/// Cutting-plane loop: append the cut from the previous subproblem (the first
/// iteration contributes the trivial theta >= 0 cut), solve the master, search
/// the extreme scenarios for the worst recourse, and stop once the worst-case
/// slack falls below epsilon and theta has closed onto the recourse value.
RpopSolution solve_rpop(const NetworkCase& net, const UncertaintySet& u, const RobustConfig& cfg);

}  // namespace rpop::robust
