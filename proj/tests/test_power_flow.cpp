#include <random>

#include "doctest.h"
#include "rpop/formulation.hpp"
#include "rpop/milp.hpp"
#include "test_util.hpp"

using namespace rpop;
using namespace rpop::form;
using rpop::test::uniform;

namespace {

std::string cases_dir() { return RPOP_CASES_DIR; }

/// Two-bus single-phase case: load at `i`, generator at `j`, one line i->j.
NetworkCase two_bus(double load_p, double load_q, double gen_cap, double c1 = 1.0) {
  std::string text = R"({
    "name": "two_bus",
    "buses": [
      {"id": "i", "phases": "a", "v_min": 0.8, "v_max": 1.2},
      {"id": "j", "phases": "a", "v_min": 0.8, "v_max": 1.2}
    ],
    "lines": [{"id": "ln", "from": "i", "to": "j", "phases": "a",
               "r": [[0.01]], "x": [[0.02]], "s_max": 5.0}],
    "loads": [{"id": "d", "bus": "i", "phases": "a",
               "s_nominal": {"a": [)" + std::to_string(load_p) + "," + std::to_string(load_q) +
                     R"(]}}],
    "generators": [{"id": "g", "bus": "j", "phases": "a",
                    "s_min": {"a": [0, -2]}, "s_max": {"a": [)" + std::to_string(gen_cap) +
                     R"(, 2]}, "c1": )" + std::to_string(c1) + R"(, "ramp_fraction": 0.3}]
  })";
  return parse_case(text, "two_bus");
}

MasterSolution all_on_setpoints(const NetworkCase& c, const std::vector<std::array<PQ, 3>>& sp) {
  MasterSolution x;
  x.z_sw.assign(c.switches.size(), 1);
  x.z_bl.assign(c.blocks.size(), 1);
  x.z_inv.assign(c.generators.size(), 0);
  if (!c.generators.empty()) x.z_inv[0] = 1;
  x.gen_setpoint = sp;
  return x;
}

lp::LpSolution solve_recourse(const RecourseModel& rm) {
  auto sol = lp::solve_lp(rm.model.lp);
  REQUIRE(sol.status == lp::LpStatus::Optimal);
  return sol;
}

}  // namespace

TEST_CASE("single-phase voltage drop matches the closed form") {
  // Flow of (-0.1, -0.05) measured i->j over r=0.01, x=0.02 drops the squared
  // voltage at i to w_j - 0.004.
  auto c = two_bus(0.1, 0.05, 1.0);
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{0.1, 0.05}}});
  FormulationOptions opt;
  auto rm = build_subproblem(c, x, nominal_loads(c), opt);
  auto sol = solve_recourse(rm);
  CHECK(total_slack(rm, sol) == doctest::Approx(0.0).epsilon(1e-9));

  double wi = sol.primal[rm.model.vars.require({VarKind::VoltageSq, 0, -1, 0})];
  double wj = sol.primal[rm.model.vars.require({VarKind::VoltageSq, 1, -1, 0})];
  double p = sol.primal[rm.model.vars.require({VarKind::FlowP, 0, -1, 0})];
  double q = sol.primal[rm.model.vars.require({VarKind::FlowQ, 0, -1, 0})];
  CHECK(p == doctest::Approx(-0.1));
  CHECK(q == doctest::Approx(-0.05));
  CHECK(wi - wj == doctest::Approx(-0.004));
}

TEST_CASE("zero flow equalizes voltages across an energized component") {
  auto c = two_bus(0.0, 0.0, 1.0);
  c.loads.clear();
  c.finalize();
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{0.0, 0.0}}});
  FormulationOptions opt;
  auto rm = build_subproblem(c, x, nominal_loads(c), opt);
  auto sol = solve_recourse(rm);
  double wi = sol.primal[rm.model.vars.require({VarKind::VoltageSq, 0, -1, 0})];
  double wj = sol.primal[rm.model.vars.require({VarKind::VoltageSq, 1, -1, 0})];
  CHECK(wi == doctest::Approx(wj));
  CHECK(total_slack(rm, sol) == doctest::Approx(0.0));
}

TEST_CASE("wye transformer squares the tap ratio") {
  const char* text = R"({
    "name": "wye_pair",
    "buses": [
      {"id": "hi", "phases": "a", "v_min": 0.5, "v_max": 2.2},
      {"id": "lo", "phases": "a", "v_min": 0.5, "v_max": 2.2}
    ],
    "transformers": [{"id": "x", "from": "hi", "to": "lo", "connection": "wye",
                      "tap_ratio": 2.0, "phases": "a", "s_max": 1.0}],
    "loads": [{"id": "d", "bus": "lo", "phases": "a", "s_nominal": {"a": [0.1, 0.0]}}],
    "generators": [{"id": "g", "bus": "hi", "phases": "a",
                    "s_min": {"a": [0, 0]}, "s_max": {"a": [1, 1]}, "c1": 1.0}]
  })";
  auto c = parse_case(text, "wye_pair");
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{0.1, 0.0}}});
  FormulationOptions opt;
  auto rm = build_subproblem(c, x, nominal_loads(c), opt);
  auto sol = solve_recourse(rm);
  CHECK(total_slack(rm, sol) == doctest::Approx(0.0));
  double whi = sol.primal[rm.model.vars.require({VarKind::VoltageSq, 0, -1, 0})];
  double wlo = sol.primal[rm.model.vars.require({VarKind::VoltageSq, 1, -1, 0})];
  CHECK(whi == doctest::Approx(4.0 * wlo));
  // Lossless port coupling.
  double pf = sol.primal[rm.model.vars.require({VarKind::FlowP, 0, -1, 0})];
  double pr = sol.primal[rm.model.vars.require({VarKind::FlowP, 1, -1, 0})];
  CHECK(pf + pr == doctest::Approx(0.0));
  CHECK(pr == doctest::Approx(-0.1));
}

TEST_CASE("delta transformer conserves total power across ports") {
  auto c = load_case(cases_dir() + "/fig1.json");
  // Energize everything, close both switches; g1 grid-forming.
  std::vector<std::array<PQ, 3>> sp(c.generators.size());
  // Nominal totals per phase: a 0.45, b 0.45, c 0.25; q: 0.10/0.10/0.05.
  sp[0] = {PQ{0.30, 0.07}, PQ{0.30, 0.07}, PQ{0.15, 0.03}};
  sp[1] = {PQ{0.15, 0.03}, PQ{0.15, 0.03}, PQ{0.10, 0.02}};
  MasterSolution x = all_on_setpoints(c, sp);
  FormulationOptions opt;
  auto rm = build_subproblem(c, x, nominal_loads(c), opt);
  auto sol = solve_recourse(rm);
  CHECK(total_slack(rm, sol) <= 1e-7);

  // Find the delta transformer ports.
  int fwd = -1, rev = -1;
  for (size_t e = 0; e < c.edges.size(); ++e) {
    if (c.edges[e].element == 1 && c.edges[e].kind == EdgeKind::XfmrFrom) fwd = e;
    if (c.edges[e].element == 1 && c.edges[e].kind == EdgeKind::XfmrTo) rev = e;
  }
  REQUIRE(fwd >= 0);
  double total = 0.0;
  for (int ph = 0; ph < 3; ++ph) {
    total += sol.primal[rm.model.vars.require({VarKind::FlowP, fwd, -1, static_cast<std::int8_t>(ph)})];
    total += sol.primal[rm.model.vars.require({VarKind::FlowP, rev, -1, static_cast<std::int8_t>(ph)})];
  }
  CHECK(total == doctest::Approx(0.0).epsilon(1e-7));
  // The load behind the delta is served: its bus draws 0.1 pu per phase.
  double p_rev_a = sol.primal[rm.model.vars.require({VarKind::FlowP, rev, -1, 0})];
  CHECK(p_rev_a != doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("polygon flow limits are sound and reasonably tight") {
  // Maximize p along the line and check against the exact circle.
  auto c = two_bus(0.1, 0.0, 1.0);
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{0.1, 0.0}}});
  FormulationOptions opt;
  auto rm = build_subproblem(c, x, nominal_loads(c), opt);
  std::mt19937_64 rng(11u);
  auto& prog = rm.model.lp;
  int pcol = rm.model.vars.require({VarKind::FlowP, 0, -1, 0});
  int qcol = rm.model.vars.require({VarKind::FlowQ, 0, -1, 0});
  double smax = 5.0;
  for (int trial = 0; trial < 40; ++trial) {
    double ang = uniform(rng, 0, 2 * M_PI);
    auto saved = prog.objective;
    for (auto& v : prog.objective) v = 0.0;
    prog.objective[pcol] = -std::cos(ang);
    prog.objective[qcol] = -std::sin(ang);
    auto sol = lp::solve_lp(prog);
    REQUIRE(sol.status == lp::LpStatus::Optimal);
    double p = sol.primal[pcol], q = sol.primal[qcol];
    double mag = std::hypot(p, q);
    CHECK(mag <= smax + 1e-7);                       // sound: inside the circle
    CHECK(mag >= smax * std::cos(M_PI / 8) - 1e-7);  // tight: at least the inradius
    prog.objective = saved;
  }
}

TEST_CASE("de-energized block forces zero adjustments and voltages") {
  auto c = two_bus(0.2, 0.05, 1.0);
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{0.0, 0.0}}});
  x.z_bl[0] = 0;  // the single block carries everything; kill it
  x.gen_setpoint[0][0] = {0.0, 0.0};
  FormulationOptions opt;
  auto rm = build_subproblem(c, x, nominal_loads(c), opt);
  auto sol = solve_recourse(rm);
  // Loads contribute nothing, so no slack; adjustments pinned at zero.
  CHECK(total_slack(rm, sol) == doctest::Approx(0.0));
  CHECK(sol.primal[rm.model.vars.require({VarKind::AdjustUpP, 0, -1, 0})] ==
        doctest::Approx(0.0));
  CHECK(sol.primal[rm.model.vars.require({VarKind::AdjustDownP, 0, -1, 0})] ==
        doctest::Approx(0.0));
  CHECK(sol.primal[rm.model.vars.require({VarKind::VoltageSq, 0, -1, 0})] ==
        doctest::Approx(0.0));
  CHECK(sol.primal[rm.model.vars.require({VarKind::VoltageSq, 1, -1, 0})] ==
        doctest::Approx(0.0));
}

TEST_CASE("load above capacity plus ramp leaves exactly the deficit as slack") {
  // Capacity 1.0, set-point 1.0 (no up room), load realization 1.4.
  auto c = two_bus(1.0, 0.0, 1.0);
  c.loads[0].uncertain = true;
  c.loads[0].s_upper[0] = {1.4, 0.0};
  c.finalize();
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{1.0, 0.0}}});
  FormulationOptions opt;
  LoadVector worst(1);
  worst[0][0] = {1.4, 0.0};
  auto rm = build_subproblem(c, x, worst, opt);
  auto sol = solve_recourse(rm);
  CHECK(total_slack(rm, sol) == doctest::Approx(0.4));
  CHECK(sol.objective == doctest::Approx(opt.omega * 0.4));
  CHECK(adjustment_cost(rm, sol, opt) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("free adjustments give a trivial cut") {
  // c1 = 0 and ample headroom: recourse value 0 with all duals at zero.
  auto c = two_bus(0.2, 0.0, 1.0, /*c1=*/0.0);
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{0.2, 0.0}}});
  FormulationOptions opt;
  auto rm = build_subproblem(c, x, nominal_loads(c), opt);
  auto sol = solve_recourse(rm);
  CHECK(sol.objective == doctest::Approx(0.0));
  auto cut = extract_cut(rm, sol, x);
  CHECK(cut.v2 == doctest::Approx(0.0));
  CHECK(cut.gradient.empty());
  CHECK(cut.value_at(x) == doctest::Approx(cut.v2));
}

TEST_CASE("cuts reproduce their value at the generation point") {
  auto c = two_bus(1.0, 0.1, 1.0);
  c.loads[0].uncertain = true;
  c.loads[0].s_upper[0] = {1.3, 0.13};
  c.finalize();
  MasterSolution x = all_on_setpoints(c, {std::array<PQ, 3>{PQ{0.9, 0.1}}});
  FormulationOptions opt;
  LoadVector worst(1);
  worst[0][0] = {1.3, 0.13};
  auto rm = build_subproblem(c, x, worst, opt);
  auto sol = solve_recourse(rm);
  auto cut = extract_cut(rm, sol, x);
  CHECK(cut.v2 == doctest::Approx(sol.objective));
  CHECK(cut.value_at(x) == doctest::Approx(cut.v2).epsilon(1e-12));
  CHECK_FALSE(cut.gradient.empty());
}

TEST_CASE("cut validity against re-solved recourse on tiny3") {
  auto c = load_case(cases_dir() + "/tiny3.json");
  FormulationOptions opt;
  auto mm = build_master(c, {}, opt);
  auto msol = milp::solve_milp(mm.mip);
  REQUIRE(msol.status == milp::MipStatus::Optimal);
  auto x = extract_master_solution(c, mm, msol);

  // Worst-style scenario: both uncertain loads at their upper bounds.
  LoadVector sc = nominal_loads(c);
  sc[1][0] = c.loads[1].s_upper[0];
  sc[2][0] = c.loads[2].s_upper[0];
  auto rm = build_subproblem(c, x, sc, opt);
  auto sol = solve_recourse(rm);
  auto cut = extract_cut(rm, sol, x);
  CHECK(cut.value_at(x) == doctest::Approx(sol.objective));

  std::mt19937_64 rng(555u);
  for (int trial = 0; trial < 50; ++trial) {
    MasterSolution alt = x;
    for (size_t g = 0; g < c.generators.size(); ++g) {
      if (!alt.z_bl[c.block_of_bus[c.generators[g].bus]]) continue;
      c.generators[g].phases.for_each([&](Phase ph) {
        int ip = static_cast<int>(ph);
        alt.gen_setpoint[g][ip].p =
            uniform(rng, c.generators[g].s_min[ip].p, c.generators[g].s_max[ip].p);
        alt.gen_setpoint[g][ip].q =
            uniform(rng, c.generators[g].s_min[ip].q, c.generators[g].s_max[ip].q);
      });
    }
    auto rm2 = build_subproblem(c, alt, sc, opt);
    auto sol2 = solve_recourse(rm2);
    CHECK(sol2.objective >= cut.value_at(alt) - 1e-7);
  }
}

TEST_CASE("gating: dead blocks and open switches carry nothing") {
  auto c = load_case(cases_dir() + "/tiny3.json");
  FormulationOptions opt;
  auto mm = build_master(c, {}, opt);
  auto& prog = mm.mip.lp;
  // Force block 1 dead and both switches open, then maximize each gated var.
  int zb1 = mm.model.vars.require({VarKind::BlockEnergized, 1});
  int zs0 = mm.model.vars.require({VarKind::SwitchClosed, 0});
  int zs1 = mm.model.vars.require({VarKind::SwitchClosed, 1});
  prog.lower[zb1] = prog.upper[zb1] = 0.0;
  prog.lower[zs0] = prog.upper[zs0] = 0.0;
  prog.lower[zs1] = prog.upper[zs1] = 0.0;

  auto extreme = [&](int col, double sign) {
    for (auto& v : prog.objective) v = 0.0;
    prog.objective[col] = sign;
    auto sol = lp::solve_lp(prog);
    REQUIRE(sol.status == lp::LpStatus::Optimal);
    return sol.primal[col];
  };

  // Bus b1 (index 2) voltage, both flow directions of switch edges.
  int w = mm.model.vars.require({VarKind::VoltageSq, 2, -1, 0});
  CHECK(extreme(w, -1.0) == doctest::Approx(0.0).epsilon(1e-8));
  int sw_edge = -1;
  for (size_t e = 0; e < c.edges.size(); ++e)
    if (c.edges[e].kind == EdgeKind::Switch && c.edges[e].element == 0) sw_edge = e;
  int pf = mm.model.vars.require({VarKind::FlowP, sw_edge, -1, 0});
  CHECK(extreme(pf, -1.0) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(extreme(pf, 1.0) == doctest::Approx(0.0).epsilon(1e-8));
}
