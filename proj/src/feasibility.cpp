#include "rpop/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "rpop/common.hpp"

namespace rpop::lab {

void SamplingPlan::validate() const {
  if (n_samples < 1) throw SolveError("sampling plan: n_samples must be at least 1");
  if (!(der_window > 0.0 && der_window <= 1.0))
    throw SolveError("sampling plan: der_window must lie in (0, 1]");
  if (levels.empty()) throw SolveError("sampling plan: at least one uncertainty level required");
  for (double l : levels)
    if (l < 0.0) throw SolveError("sampling plan: levels must be nonnegative");
}

std::vector<std::vector<double>> sample_scalars(int n_uncertain, int n_samples,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(n_samples, std::vector<double>(n_uncertain));
  for (int i = 0; i < n_samples; ++i)
    for (int k = 0; k < n_uncertain; ++k)
      out[i][k] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return out;
}

std::vector<form::LoadVector> sample_loads(const NetworkCase& net,
                                           const robust::UncertaintySet& u, int n,
                                           std::uint64_t seed) {
  auto scalars = sample_scalars(static_cast<int>(u.uncertain.size()), n, seed);
  std::vector<form::LoadVector> out;
  out.reserve(n);
  for (const auto& t : scalars) out.push_back(robust::realize_sample(net, u, t));
  return out;
}

namespace {

form::FormulationOptions with_window(const form::FormulationOptions& opt, double window) {
  form::FormulationOptions o = opt;
  o.ramp_override = window;
  return o;
}

}  // namespace

CheckResult check_feasible(const NetworkCase& net, const form::MasterSolution& fixed,
                           double der_window, const form::LoadVector& loads,
                           const form::FormulationOptions& opt, double epsilon_sample) {
  robust::RecourseEvaluator ev(net, fixed, with_window(opt, der_window));
  auto res = ev.solve_reference(loads);
  return {res.slack <= epsilon_sample, res.slack};
}

FeasibilityReport run_study(const NetworkCase& net, const form::MasterSolution& fixed,
                            const SamplingPlan& plan, const form::FormulationOptions& opt) {
  plan.validate();
  FeasibilityReport report;
  report.n_samples = plan.n_samples;
  report.seed = plan.seed;
  report.der_window = plan.der_window;

  form::FormulationOptions wopt = with_window(opt, plan.der_window);

  for (size_t li = 0; li < plan.levels.size(); ++li) {
    double level = plan.levels[li];
    auto u = robust::UncertaintySet::from_case(net, level);
    // Distinct, reproducible stream per level.
    std::uint64_t seed = plan.seed + 0x9e3779b97f4a7c15ull * (li + 1);
    auto scalars = sample_scalars(static_cast<int>(u.uncertain.size()), plan.n_samples, seed);

    int workers = plan.threads > 0 ? plan.threads : default_thread_count();
    workers = std::max(1, std::min(workers, plan.n_samples));
    std::vector<char> feasible(plan.n_samples, 0);
    std::vector<double> residual(plan.n_samples, 0.0);
    std::vector<std::exception_ptr> errors(workers);

    // Shared reference basis keeps results independent of the thread layout.
    robust::RecourseEvaluator ref(net, fixed, wopt);
    ref.solve_reference(form::nominal_loads(net));
    const lp::WarmCapsule ref_basis = ref.reference_basis();

    std::vector<std::thread> pool;
    int chunk = (plan.n_samples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int begin = w * chunk;
      int end = std::min(plan.n_samples, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end, w] {
        try {
          robust::RecourseEvaluator ev(net, fixed, wopt);
          ev.set_reference_basis(ref_basis);
          for (int i = begin; i < end; ++i) {
            auto res = ev.evaluate(robust::realize_sample(net, u, scalars[i]));
            feasible[i] = res.slack <= plan.epsilon_sample;
            residual[i] = res.slack;
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    LevelReport lr;
    lr.level = level;
    for (int i = 0; i < plan.n_samples; ++i) {
      lr.n_feasible += feasible[i] ? 1 : 0;
      lr.worst_residual = std::max(lr.worst_residual, residual[i]);
    }
    lr.fraction = static_cast<double>(lr.n_feasible) / plan.n_samples;
    report.levels.push_back(lr);
  }
  return report;
}

}  // namespace rpop::lab
