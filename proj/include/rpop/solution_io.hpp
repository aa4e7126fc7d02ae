#pragma once

#include <optional>
#include <string>

#include "rpop/config.hpp"
#include "rpop/robust.hpp"

namespace rpop::io {

/// Solution file contents (see docs/solution-schema.md). Carries enough of
/// the block graph to render exports without reloading the case.
struct SolutionFile {
  std::string case_name;
  int num_blocks = 0;
  int num_switches = 0;
  std::string status;
  double objective = 0.0;
  double generation_cost = 0.0;
  double load_shed_cost = 0.0;
  double theta = 0.0;
  std::optional<double> uncertainty_level;

  struct BlockState {
    int id = -1;
    bool energized = false;
    std::vector<std::string> grid_forming;  // generator ids
  };
  struct SwitchState {
    std::string id;
    bool closed = false;
    int from_block = -1;
    int to_block = -1;
  };
  struct SetPoint {
    std::string gen;
    char phase = 'a';
    double p = 0.0;
    double q = 0.0;
  };
  struct Iteration {
    int k = 0;
    double master_objective = 0.0;
    double theta = 0.0;
    int worst_scenario = -1;
    double v2 = 0.0;
    double slack = 0.0;
    int scenario_solves = 0;
  };
  struct Recourse {
    int scenario = -1;
    double v2 = 0.0;
    double slack = 0.0;
    std::vector<SetPoint> o_up;
    std::vector<SetPoint> o_dn;
  };

  std::vector<BlockState> blocks;
  std::vector<SwitchState> switches;
  std::vector<SetPoint> setpoints;
  std::vector<Iteration> iterations;
  std::vector<Recourse> recourse;
  double certificate_max_slack = 0.0;
  int certificate_scenarios = 0;
  double epsilon = 0.0;
};

SolutionFile make_solution_file(const NetworkCase& net, const robust::RpopSolution& sol,
                                std::optional<double> level, double epsilon);

std::string to_json_text(const SolutionFile& sf);
void write_solution(const std::string& path, const SolutionFile& sf);

/// Reads a solution file; when `net` is given, checks that it matches the
/// case and rebuilds the first-stage point.
SolutionFile read_solution(const std::string& path);
form::MasterSolution to_master_solution(const SolutionFile& sf, const NetworkCase& net);

/// Block-graph rendering: blocks as nodes shaded by energization, switch
/// edges styled by state, grid-forming units listed in the labels.
std::string to_dot(const SolutionFile& sf);

}  // namespace rpop::io
