#include "rpop/robust.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include "rpop/common.hpp"
#include "rpop/milp.hpp"

namespace rpop::robust {

UncertaintySet UncertaintySet::from_case(const NetworkCase& net, std::optional<double> level) {
  UncertaintySet u;
  u.level = level;
  size_t n = net.loads.size();
  u.lower.resize(n);
  u.upper.resize(n);
  u.nominal.resize(n);
  for (size_t d = 0; d < n; ++d) {
    const Load& ld = net.loads[d];
    u.nominal[d] = ld.s_nominal;
    if (ld.uncertain && level.has_value()) {
      for (int p = 0; p < 3; ++p) {
        double lo_p = ld.s_nominal[p].p * (1.0 - *level);
        double hi_p = ld.s_nominal[p].p * (1.0 + *level);
        double lo_q = ld.s_nominal[p].q * (1.0 - *level);
        double hi_q = ld.s_nominal[p].q * (1.0 + *level);
        u.lower[d][p] = {std::min(lo_p, hi_p), std::min(lo_q, hi_q)};
        u.upper[d][p] = {std::max(lo_p, hi_p), std::max(lo_q, hi_q)};
      }
    } else if (ld.uncertain) {
      u.lower[d] = ld.s_lower;
      u.upper[d] = ld.s_upper;
    } else {
      u.lower[d] = u.upper[d] = ld.s_nominal;
    }
  }
  std::vector<int> unc;
  for (size_t d = 0; d < n; ++d)
    if (net.loads[d].uncertain) unc.push_back(static_cast<int>(d));
  std::sort(unc.begin(), unc.end(),
            [&](int a, int b) { return net.loads[a].id < net.loads[b].id; });
  u.uncertain = std::move(unc);
  return u;
}

double UncertaintySet::max_width() const {
  double w = 0.0;
  for (int d : uncertain)
    for (int p = 0; p < 3; ++p) {
      w = std::max(w, upper[d][p].p - lower[d][p].p);
      w = std::max(w, upper[d][p].q - lower[d][p].q);
    }
  return w;
}

form::LoadVector realize(const NetworkCase& net, const UncertaintySet& u,
                         const ExtremeScenario& sc) {
  form::LoadVector loads(net.loads.size());
  for (size_t d = 0; d < net.loads.size(); ++d) loads[d] = u.nominal[d];
  for (size_t k = 0; k < u.uncertain.size(); ++k) {
    int d = u.uncertain[k];
    if (sc.zeta_plus[k])
      loads[d] = u.upper[d];
    else
      loads[d] = u.lower[d];  // zeta_minus or unflagged (de-energized block)
  }
  return loads;
}

form::LoadVector realize_sample(const NetworkCase& net, const UncertaintySet& u,
                                const std::vector<double>& t) {
  form::LoadVector loads(net.loads.size());
  for (size_t d = 0; d < net.loads.size(); ++d) loads[d] = u.nominal[d];
  for (size_t k = 0; k < u.uncertain.size(); ++k) {
    int d = u.uncertain[k];
    for (int p = 0; p < 3; ++p) {
      loads[d][p].p = u.lower[d][p].p + t[k] * (u.upper[d][p].p - u.lower[d][p].p);
      loads[d][p].q = u.lower[d][p].q + t[k] * (u.upper[d][p].q - u.lower[d][p].q);
    }
  }
  return loads;
}

std::vector<ExtremeScenario> enumerate_extremes(const UncertaintySet& u,
                                                const std::vector<char>& z_bl,
                                                const NetworkCase& net, int scenario_cap) {
  std::vector<int> active;  // positions into u.uncertain
  for (size_t k = 0; k < u.uncertain.size(); ++k) {
    int block = net.block_of_bus[net.loads[u.uncertain[k]].bus];
    if (z_bl[block]) active.push_back(static_cast<int>(k));
  }
  int m = static_cast<int>(active.size());
  if (m > scenario_cap)
    throw SolveError("enumerate_extremes: " + std::to_string(m) +
                     " uncertain loads exceed the scenario cap of " +
                     std::to_string(scenario_cap) + "; raise scenario_cap to override");

  std::vector<ExtremeScenario> out;
  std::vector<form::LoadVector> seen;
  int next_id = 0;
  for (long mask = 0; mask < (1L << m); ++mask) {
    ExtremeScenario sc;
    sc.zeta_plus.assign(u.uncertain.size(), 0);
    sc.zeta_minus.assign(u.uncertain.size(), 0);
    for (int j = 0; j < m; ++j) {
      if ((mask >> j) & 1)
        sc.zeta_plus[active[j]] = 1;
      else
        sc.zeta_minus[active[j]] = 1;
    }
    // Deduplicate identical realizations (degenerate box widths).
    form::LoadVector lv = realize(net, u, sc);
    bool dup = false;
    for (const auto& other : seen)
      if (other == lv) {
        dup = true;
        break;
      }
    if (dup) continue;
    sc.id = next_id++;
    seen.push_back(std::move(lv));
    out.push_back(std::move(sc));
  }
  return out;
}

RecourseEvaluator::RecourseEvaluator(const NetworkCase& net, const form::MasterSolution& x,
                                     const form::FormulationOptions& opt)
    : net_(net), rm_(form::build_subproblem(net, x, form::nominal_loads(net), opt)) {}

RecourseEvaluator::Result RecourseEvaluator::solve_reference(const form::LoadVector& loads) {
  form::set_subproblem_loads(rm_, net_, loads);
  Result r;
  r.sol = lp::solve_lp(rm_.model.lp, sopt_, static_cast<const lp::WarmCapsule*>(nullptr),
                       &reference_);
  if (r.sol.status != lp::LpStatus::Optimal)
    throw SolveError("recourse subproblem did not solve to optimality");
  has_reference_ = true;
  r.objective = r.sol.objective;
  r.slack = form::total_slack(rm_, r.sol);
  return r;
}

void RecourseEvaluator::set_reference_basis(const lp::WarmCapsule& capsule) {
  reference_ = capsule;
  has_reference_ = true;
}

RecourseEvaluator::Result RecourseEvaluator::evaluate(const form::LoadVector& loads) {
  form::set_subproblem_loads(rm_, net_, loads);
  Result r;
  r.sol = lp::solve_lp(rm_.model.lp, sopt_,
                       has_reference_ ? &reference_ : static_cast<const lp::WarmCapsule*>(nullptr),
                       static_cast<lp::WarmCapsule*>(nullptr));
  if (r.sol.status != lp::LpStatus::Optimal)
    throw SolveError("recourse subproblem did not solve to optimality");
  r.objective = r.sol.objective;
  r.slack = form::total_slack(rm_, r.sol);
  return r;
}

namespace {

ScenarioOutcome make_outcome(const NetworkCase& net, const form::RecourseModel& rm,
                             const lp::LpSolution& sol, int id, double slack) {
  ScenarioOutcome oc;
  oc.id = id;
  oc.v2 = sol.objective;
  oc.slack = slack;
  oc.o_up.assign(net.generators.size(), {});
  oc.o_dn.assign(net.generators.size(), {});
  const auto& keys = rm.model.vars.keys();
  for (size_t j = 0; j < keys.size(); ++j) {
    const auto& k = keys[j];
    double v = sol.primal[j];
    switch (k.kind) {
      case form::VarKind::AdjustUpP: oc.o_up[k.a][k.phase].p = v; break;
      case form::VarKind::AdjustUpQ: oc.o_up[k.a][k.phase].q = v; break;
      case form::VarKind::AdjustDownP: oc.o_dn[k.a][k.phase].p = v; break;
      case form::VarKind::AdjustDownQ: oc.o_dn[k.a][k.phase].q = v; break;
      default: break;
    }
  }
  return oc;
}

}  // namespace

WorstCaseResult worst_case(const NetworkCase& net, const form::MasterSolution& x,
                           const UncertaintySet& u, const RobustConfig& cfg) {
  auto scenarios = enumerate_extremes(u, x.z_bl, net, cfg.scenario_cap);
  int n = static_cast<int>(scenarios.size());

  // Reference solve at nominal loads fixes the warm-start basis every
  // scenario reuses, making results independent of the thread layout.
  RecourseEvaluator ref(net, x, cfg.form);
  ref.solve_reference(form::nominal_loads(net));
  const lp::WarmCapsule ref_basis = ref.reference_basis();

  int workers = cfg.threads > 0 ? cfg.threads : default_thread_count();
  workers = std::max(1, std::min(workers, n));

  std::vector<ScenarioOutcome> outcomes(n);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  int chunk = (n + workers - 1) / workers;
  for (int wkr = 0; wkr < workers; ++wkr) {
    int begin = wkr * chunk;
    int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, wkr, begin, end] {
      try {
        RecourseEvaluator ev(net, x, cfg.form);
        ev.set_reference_basis(ref_basis);
        for (int i = begin; i < end; ++i) {
          auto res = ev.evaluate(realize(net, u, scenarios[i]));
          outcomes[i] = make_outcome(net, ev.model(), res.sol, scenarios[i].id, res.slack);
        }
      } catch (...) {
        errors[wkr] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Deterministic max-reduce: largest objective, ties to the lowest id.
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (outcomes[i].v2 > outcomes[best].v2) best = i;

  WorstCaseResult wc;
  wc.worst = scenarios[best];
  wc.subproblem_solves = n;
  wc.outcomes = outcomes;

  // Re-solve the winner on the reference evaluator for the cut.
  auto res = ref.evaluate(realize(net, u, scenarios[best]));
  wc.v2 = res.objective;
  wc.slack = res.slack;
  wc.cut = form::extract_cut(ref.model(), res.sol, x);
  wc.cut.scenario_id = scenarios[best].id;
  return wc;
}

RpopSolution solve_rpop(const NetworkCase& net, const UncertaintySet& u, const RobustConfig& cfg) {
  if (cfg.epsilon <= 0) throw SolveError("solve_rpop: epsilon must be positive");
  RpopSolution out;
  std::vector<form::CutRecord> cuts;
  {
    // Trivial first cut from the zero initialization: theta >= 0.
    form::CutRecord trivial;
    trivial.v2 = 0.0;
    trivial.scenario_id = -1;
    cuts.push_back(trivial);
  }

  milp::MipOptions mip_opt;
  mip_opt.node_limit = cfg.milp_node_limit;
  mip_opt.log = cfg.milp_log;

  auto t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    auto mm = form::build_master(net, cuts, cfg.form);
    if (cfg.fix_topology) {
      for (size_t s = 0; s < net.switches.size(); ++s) {
        int col = mm.model.vars.require({form::VarKind::SwitchClosed, static_cast<int>(s)});
        double v = net.switches[s].normally_closed ? 1.0 : 0.0;
        mm.mip.lp.lower[col] = mm.mip.lp.upper[col] = v;
        mm.shed_everything[col] = v;  // shedding stays feasible under pinned switches
      }
    }
    if (!cfg.dump_dir.empty()) {
      std::ofstream dump_out(cfg.dump_dir + "/master_" + std::to_string(k) + ".lp");
      lp::dump(mm.mip.lp, dump_out);
    }
    mip_opt.initial_solution = mm.shed_everything;
    auto msol = milp::solve_milp(mm.mip, mip_opt);
    if (msol.status != milp::MipStatus::Optimal)
      throw SolveError("solve_rpop: master problem infeasible");
    auto x = form::extract_master_solution(net, mm, msol);

    auto wc = worst_case(net, x, u, cfg);
    if (!cfg.dump_dir.empty()) {
      auto rm = form::build_subproblem(net, x, realize(net, u, wc.worst), cfg.form);
      std::ofstream dump_out(cfg.dump_dir + "/subproblem_" + std::to_string(k) + ".lp");
      lp::dump(rm.model.lp, dump_out);
    }

    auto now = std::chrono::steady_clock::now();
    IterationLog log;
    log.k = k;
    log.master_objective = msol.objective;
    log.theta = x.theta;
    log.worst_scenario = wc.worst.id;
    log.v2 = wc.v2;
    log.slack = wc.slack;
    log.scenario_solves = wc.subproblem_solves;
    log.seconds = std::chrono::duration<double>(now - t0).count();
    out.logs.push_back(log);
    if (cfg.log != nullptr)
      (*cfg.log) << "iter " << k << " master " << log.master_objective << " theta " << log.theta
                 << " worst " << log.worst_scenario << " v2 " << log.v2 << " slack " << log.slack
                 << " solves " << log.scenario_solves << " seconds " << log.seconds << "\n";

    bool slack_ok = wc.slack <= cfg.epsilon;
    bool gap_ok = (wc.v2 - x.theta) <= cfg.opt_gap_rel * (1.0 + std::abs(wc.v2));
    if (slack_ok && gap_ok) {
      out.status = RpopStatus::Converged;
      out.x = x;
      out.cuts = cuts;
      out.recourse = wc.outcomes;
      out.certificate_scenarios = wc.subproblem_solves;
      out.certificate_max_slack = 0.0;
      for (const auto& oc : wc.outcomes)
        out.certificate_max_slack = std::max(out.certificate_max_slack, oc.slack);
      out.objective = msol.objective;
      return out;
    }
    cuts.push_back(wc.cut);

    // Keep the best iterate in case the iteration cap is hit.
    out.x = x;
    out.cuts = cuts;
    out.recourse = wc.outcomes;
    out.certificate_scenarios = wc.subproblem_solves;
    out.certificate_max_slack = 0.0;
    for (const auto& oc : wc.outcomes)
      out.certificate_max_slack = std::max(out.certificate_max_slack, oc.slack);
    out.objective = msol.objective;
  }
  out.status = RpopStatus::IterationLimit;
  return out;
}

}  // namespace rpop::robust
