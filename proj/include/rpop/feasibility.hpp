#pragma once

#include <cstdint>
#include <vector>

#include "rpop/robust.hpp"

namespace rpop::lab {

struct SamplingPlan {
  int n_samples = 10000;
  std::uint64_t seed = 1;
  std::vector<double> levels;       // uncertainty levels to sweep
  double der_window = 0.30;         // adjustment headroom as a capacity fraction
  double epsilon_sample = 1e-6;     // feasibility threshold on total slack
  int threads = 0;

  void validate() const;
};

struct LevelReport {
  double level = 0.0;
  long n_feasible = 0;
  double fraction = 0.0;
  double worst_residual = 0.0;  // largest total slack seen across samples
};

struct FeasibilityReport {
  long n_samples = 0;
  std::uint64_t seed = 0;
  double der_window = 0.0;
  std::vector<LevelReport> levels;
};

/// One uniform scalar per uncertain load and sample, reproducible from the
/// seed and independent of the platform's distribution implementations.
std::vector<std::vector<double>> sample_scalars(int n_uncertain, int n_samples,
                                                std::uint64_t seed);

/// I.i.d. uniform load realizations within the box.
std::vector<form::LoadVector> sample_loads(const NetworkCase& net,
                                           const robust::UncertaintySet& u, int n,
                                           std::uint64_t seed);

struct CheckResult {
  bool feasible = false;
  double residual = 0.0;  // total slack of the best dispatch
};

/// Feasibility of one load realization for a fixed configuration: does a
/// dispatch within +-window of the set-points satisfy the network physics?
CheckResult check_feasible(const NetworkCase& net, const form::MasterSolution& fixed,
                           double der_window, const form::LoadVector& loads,
                           const form::FormulationOptions& opt, double epsilon_sample = 1e-6);

/// Sweeps the plan's uncertainty levels, sampling and checking each level.
FeasibilityReport run_study(const NetworkCase& net, const form::MasterSolution& fixed,
                            const SamplingPlan& plan, const form::FormulationOptions& opt);

}  // namespace rpop::lab
