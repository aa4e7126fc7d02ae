#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rpop/formulation.hpp"
#include "rpop/robust.hpp"

namespace rpop {

/// Run parameters; file values are overridden by CLI flags.
struct RunConfig {
  double epsilon = 1e-4;
  double omega = 705.0;
  double alpha_base = 10.0;
  double alpha_per_load = 0.01;
  int k_der = 1;
  std::optional<double> ramp_fraction;  // unset: per-generator case values
  int polygon_facets = 8;
  int max_iterations = 200;
  bool master_nominal_pf = true;
  int scenario_cap = 20;
  std::uint64_t seed = 1;
  std::vector<double> uncertainty_levels{0.10};
  double opt_gap_rel = 1e-7;
  int threads = 0;
  bool fix_topology = false;
  int n_samples = 10000;
  double der_window = 0.30;
  double sample_epsilon = 1e-6;

  void validate() const;

  /// Parses `key = value` lines; '#' starts a comment. Lists are
  /// comma-separated. Unknown keys are rejected.
  static RunConfig from_file(const std::string& path);
  void apply(const std::string& key, const std::string& value);
  void print(std::ostream& os) const;

  form::FormulationOptions formulation() const;
  robust::RobustConfig robust(std::ostream* log = nullptr) const;
};

}  // namespace rpop
