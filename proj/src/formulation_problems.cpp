#include <algorithm>
#include <cmath>

#include "rpop/formulation.hpp"

namespace rpop::form {

namespace {

/// Recourse headroom per component: fraction of the larger capacity magnitude.
double ramp_limit(const Generator& g, int phase, bool reactive, double override_fraction) {
  double cap = reactive ? std::max(std::abs(g.s_max[phase].q), std::abs(g.s_min[phase].q))
                        : std::max(std::abs(g.s_max[phase].p), std::abs(g.s_min[phase].p));
  double fraction = override_fraction >= 0.0 ? override_fraction : g.ramp_fraction;
  return fraction * cap;
}

void add_flow_vars(Model& m, const NetworkCase& net) {
  for (size_t bus = 0; bus < net.buses.size(); ++bus) {
    const Bus& b = net.buses[bus];
    b.phases.for_each([&](Phase ph) {
      VarKey k{VarKind::VoltageSq, static_cast<int>(bus), -1, static_cast<std::int8_t>(ph)};
      m.vars.add(m.lp, k, 0.0, b.v_max * b.v_max, 0.0, key_name(k, net));
    });
  }
  for (size_t e = 0; e < net.edges.size(); ++e) {
    const Edge& edge = net.edges[e];
    edge.phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      double smax = 0.0;
      switch (edge.kind) {
        case EdgeKind::Line: smax = net.lines[edge.element].s_max[ip]; break;
        case EdgeKind::Switch: smax = net.switches[edge.element].s_max[ip]; break;
        case EdgeKind::XfmrFrom:
        case EdgeKind::XfmrTo: smax = net.transformers[edge.element].s_max[ip]; break;
      }
      VarKey kp{VarKind::FlowP, static_cast<int>(e), -1, static_cast<std::int8_t>(ph)};
      VarKey kq{VarKind::FlowQ, static_cast<int>(e), -1, static_cast<std::int8_t>(ph)};
      m.vars.add(m.lp, kp, -smax, smax, 0.0, key_name(kp, net));
      m.vars.add(m.lp, kq, -smax, smax, 0.0, key_name(kq, net));
    });
  }
}

}  // namespace

MasterModel build_master(const NetworkCase& net, const std::vector<CutRecord>& cuts,
                         const FormulationOptions& opt) {
  MasterModel mm;
  Model& m = mm.model;
  int nb = static_cast<int>(net.blocks.size());
  int ns = static_cast<int>(net.switches.size());
  std::vector<int> binaries;

  auto add_binary = [&](VarKey k) {
    int col = m.vars.add(m.lp, k, 0.0, 1.0, 0.0, key_name(k, net));
    binaries.push_back(col);
    return col;
  };

  // First-stage binaries in a fixed order: switches, blocks, inverters, colors.
  for (int s = 0; s < ns; ++s) add_binary({VarKind::SwitchClosed, s});
  for (int l = 0; l < nb; ++l) {
    int col = add_binary({VarKind::BlockEnergized, l});
    double coef = -net.blocks[l].weight;
    for (int g : net.blocks[l].generators) coef += net.generators[g].c0;
    m.lp.objective[col] = coef;
    mm.objective_constant += net.blocks[l].weight;
  }
  for (size_t g = 0; g < net.generators.size(); ++g)
    add_binary({VarKind::GridForming, static_cast<int>(g)});
  // With a single grid-former per component the color variables are forced to
  // integral values by the capacity, consistency and virtual-flow rows once
  // the z variables are integral, so they may stay continuous.
  for (int s = 0; s < ns; ++s)
    for (int l = 0; l < nb; ++l) {
      VarKey k{VarKind::SwitchColor, s, l};
      int col = m.vars.add(m.lp, k, 0.0, 1.0, 0.0, key_name(k, net));
      if (opt.k_der > 1) binaries.push_back(col);
    }

  // Coloring auxiliaries.
  if (nb >= 2) {
    double big = static_cast<double>(ns);
    for (int l = 0; l < nb; ++l)
      for (int s = 0; s < ns; ++s) {
        VarKey k{VarKind::CommodityFlow, s, l};
        m.vars.add(m.lp, k, -big, big, 0.0, key_name(k, net));
      }
    for (int l = 0; l < nb; ++l)
      for (int l2 = 0; l2 < nb; ++l2) {
        if (l2 == l) continue;
        VarKey k{VarKind::VirtualFlow, l, l2};
        m.vars.add(m.lp, k, 0.0, 1.0, 0.0, key_name(k, net));
      }
  }

  // Generator set-points, active power priced.
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    gen.phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      VarKey kp{VarKind::GenP, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)};
      VarKey kq{VarKind::GenQ, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)};
      m.vars.add(m.lp, kp, std::min(0.0, gen.s_min[ip].p), std::max(0.0, gen.s_max[ip].p), gen.c1,
                 key_name(kp, net));
      m.vars.add(m.lp, kq, std::min(0.0, gen.s_min[ip].q), std::max(0.0, gen.s_max[ip].q), 0.0,
                 key_name(kq, net));
    });
  }

  // Worst-case recourse estimate.
  int theta = m.vars.add(m.lp, {VarKind::Theta, 0}, 0.0, kInf, 1.0, "theta");

  add_coloring(m, net, opt);
  add_radiality(m, net);

  if (opt.master_nominal_pf) {
    add_flow_vars(m, net);
    LoadVector nominal = nominal_loads(net);
    add_power_flow(m, net, nominal, opt);
  }

  // Sub-gradient cuts: theta >= v2 + g'(x - x*).
  for (size_t k = 0; k < cuts.size(); ++k) {
    const CutRecord& cut = cuts[k];
    std::vector<lp::Entry> lhs{{theta, 1.0}};
    double rhs = cut.v2;
    for (const auto& t : cut.gradient) lhs.push_back({m.vars.require(t.key), -t.coeff});
    for (const auto& [key, val] : cut.x_star)
      for (const auto& t : cut.gradient)
        if (t.key == key) rhs -= t.coeff * val;
    m.add_row(std::move(lhs), lp::Sense::GE, rhs, {}, "cut[" + std::to_string(k) + "]");
  }

  m.lp.objective_constant = mm.objective_constant;

  // Shedding every block is always feasible: all binaries and flows zero,
  // every virtual edge carries one unit, and theta covers the cut constants.
  mm.shed_everything.assign(m.lp.num_vars, 0.0);
  if (nb >= 2) {
    for (int l = 0; l < nb; ++l)
      for (int l2 = 0; l2 < nb; ++l2) {
        if (l2 == l) continue;
        mm.shed_everything[m.vars.require({VarKind::VirtualFlow, l, l2})] = 1.0;
      }
  }
  {
    double theta0 = 0.0;
    for (const CutRecord& cut : cuts) {
      double at_zero = cut.v2;
      for (const auto& [key, val] : cut.x_star)
        for (const auto& t : cut.gradient)
          if (t.key == key) at_zero -= t.coeff * val;
      theta0 = std::max(theta0, at_zero);
    }
    mm.shed_everything[theta] = theta0;
  }

  mm.mip.lp = m.lp;
  mm.mip.binary_vars = binaries;
  return mm;
}

MasterSolution extract_master_solution(const NetworkCase& net, const MasterModel& mm,
                                       const milp::MipSolution& sol) {
  MasterSolution x;
  const auto& vars = mm.model.vars;
  x.z_sw.resize(net.switches.size());
  x.z_bl.resize(net.blocks.size());
  x.z_inv.resize(net.generators.size());
  x.gen_setpoint.assign(net.generators.size(), {});
  for (size_t s = 0; s < net.switches.size(); ++s)
    x.z_sw[s] = sol.assignment[vars.require({VarKind::SwitchClosed, static_cast<int>(s)})] > 0.5;
  for (size_t l = 0; l < net.blocks.size(); ++l)
    x.z_bl[l] = sol.assignment[vars.require({VarKind::BlockEnergized, static_cast<int>(l)})] > 0.5;
  for (size_t g = 0; g < net.generators.size(); ++g)
    x.z_inv[g] = sol.assignment[vars.require({VarKind::GridForming, static_cast<int>(g)})] > 0.5;
  for (size_t g = 0; g < net.generators.size(); ++g) {
    net.generators[g].phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      x.gen_setpoint[g][ip].p = sol.assignment[vars.require(
          {VarKind::GenP, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)})];
      x.gen_setpoint[g][ip].q = sol.assignment[vars.require(
          {VarKind::GenQ, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)})];
    });
  }
  x.theta = sol.assignment[vars.require({VarKind::Theta, 0})];
  x.objective = sol.objective;
  x.shed_cost = 0.0;
  x.gen_cost = 0.0;
  for (size_t l = 0; l < net.blocks.size(); ++l)
    if (!x.z_bl[l]) x.shed_cost += net.blocks[l].weight;
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    gen.phases.for_each([&](Phase ph) { x.gen_cost += gen.c1 * x.gen_setpoint[g][static_cast<int>(ph)].p; });
    if (x.z_bl[net.block_of_bus[gen.bus]]) x.gen_cost += gen.c0;
  }
  return x;
}

RecourseModel build_subproblem(const NetworkCase& net, const MasterSolution& x_star,
                               const LoadVector& loads, const FormulationOptions& opt) {
  RecourseModel rm;
  rm.x_star = x_star;
  Model& m = rm.model;
  m.x_star = &rm.x_star;

  // Adjustment variables per generator phase and component; the active ones
  // are priced, the slacks carry the violation penalty.
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    gen.phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      auto add_adj = [&](VarKind kind, bool reactive, double cost) {
        VarKey k{kind, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)};
        m.vars.add(m.lp, k, 0.0, ramp_limit(gen, ip, reactive, opt.ramp_override), cost,
                   key_name(k, net));
      };
      add_adj(VarKind::AdjustUpP, false, gen.c1);
      add_adj(VarKind::AdjustDownP, false, gen.c1);
      add_adj(VarKind::AdjustUpQ, true, 0.0);
      add_adj(VarKind::AdjustDownQ, true, 0.0);
    });
  }
  for (size_t bus = 0; bus < net.buses.size(); ++bus) {
    net.buses[bus].phases.for_each([&](Phase ph) {
      auto add_slack = [&](VarKind kind) {
        VarKey k{kind, static_cast<int>(bus), -1, static_cast<std::int8_t>(ph)};
        m.vars.add(m.lp, k, 0.0, kInf, opt.omega, key_name(k, net));
      };
      add_slack(VarKind::SlackUpP);
      add_slack(VarKind::SlackDownP);
      add_slack(VarKind::SlackUpQ);
      add_slack(VarKind::SlackDownQ);
    });
  }

  add_flow_vars(m, net);

  // Adjustment caps against capacity and the fixed set-point.
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    VarKey zbl{VarKind::BlockEnergized, net.block_of_bus[gen.bus]};
    gen.phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      std::string base = "adjust_capacity[" + gen.id + "," + std::string(1, phase_char(ph)) + "]";
      VarKey kp{VarKind::GenP, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)};
      VarKey kq{VarKind::GenQ, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)};
      int oup = m.vars.require({VarKind::AdjustUpP, static_cast<int>(g), -1,
                                static_cast<std::int8_t>(ph)});
      int odp = m.vars.require({VarKind::AdjustDownP, static_cast<int>(g), -1,
                                static_cast<std::int8_t>(ph)});
      int ouq = m.vars.require({VarKind::AdjustUpQ, static_cast<int>(g), -1,
                                static_cast<std::int8_t>(ph)});
      int odq = m.vars.require({VarKind::AdjustDownQ, static_cast<int>(g), -1,
                                static_cast<std::int8_t>(ph)});
      // o+ <= z* s_max - s*, o- <= s* - z* s_min (componentwise).
      m.add_row({{oup, 1.0}}, lp::Sense::LE, 0.0,
                {{zbl, gen.s_max[ip].p}, {kp, -1.0}}, base + ".p.up");
      m.add_row({{odp, 1.0}}, lp::Sense::LE, 0.0,
                {{zbl, -gen.s_min[ip].p}, {kp, 1.0}}, base + ".p.dn");
      m.add_row({{ouq, 1.0}}, lp::Sense::LE, 0.0,
                {{zbl, gen.s_max[ip].q}, {kq, -1.0}}, base + ".q.up");
      m.add_row({{odq, 1.0}}, lp::Sense::LE, 0.0,
                {{zbl, -gen.s_min[ip].q}, {kq, 1.0}}, base + ".q.dn");
    });
  }

  add_power_flow(m, net, loads, opt);
  return rm;
}

void set_subproblem_loads(RecourseModel& rm, const NetworkCase& net, const LoadVector& loads) {
  Model& m = rm.model;
  for (const BalanceRowRef& ref : m.balance_rows) {
    double load_total = 0.0;
    for (int d : net.blocks[net.block_of_bus[ref.bus]].loads) {
      const Load& ld = net.loads[d];
      if (ld.bus != ref.bus || !ld.phases.contains(static_cast<Phase>(ref.phase))) continue;
      load_total += ref.reactive ? loads[d][ref.phase].q : loads[d][ref.phase].p;
    }
    double rhs = 0.0;
    bool found = false;
    for (auto& t : m.row_x[ref.row]) {
      if (t.key.kind == VarKind::BlockEnergized) {
        t.coeff = -load_total;
        found = true;
      }
      rhs += t.coeff * m.x_value(t.key);
    }
    if (!found && load_total != 0.0)
      throw SolveError("set_subproblem_loads: balance row lacks a load term");
    m.lp.rows[ref.row].rhs = rhs;
  }
}

double total_slack(const RecourseModel& rm, const lp::LpSolution& sol) {
  double total = 0.0;
  const auto& keys = rm.model.vars.keys();
  for (size_t j = 0; j < keys.size(); ++j) {
    switch (keys[j].kind) {
      case VarKind::SlackUpP:
      case VarKind::SlackUpQ:
      case VarKind::SlackDownP:
      case VarKind::SlackDownQ: total += sol.primal[j]; break;
      default: break;
    }
  }
  return total;
}

double adjustment_cost(const RecourseModel& rm, const lp::LpSolution& sol,
                       const FormulationOptions& opt) {
  return sol.objective - opt.omega * total_slack(rm, sol);
}

CutRecord extract_cut(const RecourseModel& rm, const lp::LpSolution& sol,
                      const MasterSolution& x_star) {
  if (sol.status != lp::LpStatus::Optimal)
    throw SolveError("extract_cut: recourse solution is not optimal");
  CutRecord cut;
  cut.v2 = sol.objective;

  std::map<VarKey, double> grad;
  for (size_t r = 0; r < rm.model.row_x.size(); ++r) {
    if (rm.model.row_x[r].empty()) continue;
    double pi = sol.duals[r];
    if (pi == 0.0) continue;
    cut.coupled_duals.emplace_back(rm.model.lp.rows[r].tag, pi);
    for (const auto& t : rm.model.row_x[r]) grad[t.key] += pi * t.coeff;
  }
  for (const auto& [key, g] : grad) {
    if (g == 0.0) continue;
    cut.gradient.push_back({key, g});
    cut.x_star.emplace_back(key, x_star.xval(key));
  }
  return cut;
}

}  // namespace rpop::form
