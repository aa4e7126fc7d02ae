#include <algorithm>
#include <cmath>

#include "rpop/formulation.hpp"

namespace rpop::form {

std::string key_name(const VarKey& k, const NetworkCase& net) {
  auto ph = [&]() { return std::string(1, "abc"[k.phase]); };
  switch (k.kind) {
    case VarKind::SwitchClosed: return "z_sw[" + net.switches[k.a].id + "]";
    case VarKind::BlockEnergized: return "z_bl[" + std::to_string(k.a) + "]";
    case VarKind::GridForming: return "z_inv[" + net.generators[k.a].id + "]";
    case VarKind::SwitchColor:
      return "color[" + net.switches[k.a].id + "," + std::to_string(k.b) + "]";
    case VarKind::CommodityFlow:
      return "eta[" + net.switches[k.a].id + "," + std::to_string(k.b) + "]";
    case VarKind::VirtualFlow:
      return "xi[" + std::to_string(k.a) + "," + std::to_string(k.b) + "]";
    case VarKind::GenP: return "p_gen[" + net.generators[k.a].id + "," + ph() + "]";
    case VarKind::GenQ: return "q_gen[" + net.generators[k.a].id + "," + ph() + "]";
    case VarKind::VoltageSq: return "w[" + net.buses[k.a].id + "," + ph() + "]";
    case VarKind::FlowP: return "p_flow[e" + std::to_string(k.a) + "," + ph() + "]";
    case VarKind::FlowQ: return "q_flow[e" + std::to_string(k.a) + "," + ph() + "]";
    case VarKind::Theta: return "theta";
    case VarKind::AdjustUpP: return "o_up_p[" + net.generators[k.a].id + "," + ph() + "]";
    case VarKind::AdjustUpQ: return "o_up_q[" + net.generators[k.a].id + "," + ph() + "]";
    case VarKind::AdjustDownP: return "o_dn_p[" + net.generators[k.a].id + "," + ph() + "]";
    case VarKind::AdjustDownQ: return "o_dn_q[" + net.generators[k.a].id + "," + ph() + "]";
    case VarKind::SlackUpP: return "h_up_p[" + net.buses[k.a].id + "," + ph() + "]";
    case VarKind::SlackUpQ: return "h_up_q[" + net.buses[k.a].id + "," + ph() + "]";
    case VarKind::SlackDownP: return "h_dn_p[" + net.buses[k.a].id + "," + ph() + "]";
    case VarKind::SlackDownQ: return "h_dn_q[" + net.buses[k.a].id + "," + ph() + "]";
  }
  return "?";
}

double MasterSolution::xval(const VarKey& k) const {
  switch (k.kind) {
    case VarKind::SwitchClosed: return z_sw[k.a];
    case VarKind::BlockEnergized: return z_bl[k.a];
    case VarKind::GridForming: return z_inv[k.a];
    case VarKind::GenP: return gen_setpoint[k.a][k.phase].p;
    case VarKind::GenQ: return gen_setpoint[k.a][k.phase].q;
    default: break;
  }
  throw SolveError("MasterSolution: key is not a first-stage coordinate");
}

double CutRecord::value_at(const MasterSolution& x) const {
  double v = v2;
  for (const auto& t : gradient) v += t.coeff * x.xval(t.key);
  for (const auto& [key, val] : x_star) {
    // subtract gradient' x_star
    for (const auto& t : gradient)
      if (t.key == key) v -= t.coeff * val;
  }
  return v;
}

LoadVector nominal_loads(const NetworkCase& net) {
  LoadVector loads(net.loads.size());
  for (size_t d = 0; d < net.loads.size(); ++d) loads[d] = net.loads[d].s_nominal;
  return loads;
}

int VariableIndexer::add(lp::LinearProgram& lp, const VarKey& key, double lo, double hi,
                         double cost, std::string tag) {
  auto [it, inserted] = index_.emplace(key, lp.num_vars);
  if (!inserted) throw SolveError("indexer: duplicate variable " + tag);
  keys_.push_back(key);
  return lp.add_var(lo, hi, cost, std::move(tag));
}

int VariableIndexer::get(const VarKey& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

int VariableIndexer::require(const VarKey& key) const {
  int idx = get(key);
  if (idx < 0) throw SolveError("indexer: missing variable");
  return idx;
}

double Model::x_value(const VarKey& k) const {
  if (x_star == nullptr) throw SolveError("model: no first-stage point bound");
  return x_star->xval(k);
}

int Model::add_row(std::vector<lp::Entry> lhs, lp::Sense sense, double rhs0,
                   std::vector<XTerm> xterms, std::string tag, bool lazy) {
  double rhs = rhs0;
  if (ctx == Context::Master) {
    for (const auto& t : xterms) lhs.push_back({vars.require(t.key), -t.coeff});
  } else {
    for (const auto& t : xterms) rhs += t.coeff * x_value(t.key);
  }
  int r = lp.add_row(std::move(lhs), sense, rhs, std::move(tag), lazy);
  if (ctx == Context::Recourse) {
    row_x.resize(r + 1);
    row_x[r] = std::move(xterms);
  }
  return r;
}

namespace {

/// Switches incident to a block, in switch order.
std::vector<int> switches_at_block(const NetworkCase& net, int block) {
  std::vector<int> out;
  for (size_t s = 0; s < net.switch_blocks.size(); ++s)
    if (net.switch_blocks[s].first == block || net.switch_blocks[s].second == block)
      out.push_back(static_cast<int>(s));
  return out;
}

}  // namespace

void add_radiality(Model& m, const NetworkCase& net) {
  int ns = static_cast<int>(net.switches.size());
  if (ns == 0) return;
  if (ns > 20) throw SolveError("radiality: more than 20 switches is out of scope");
  int nb = static_cast<int>(net.blocks.size());

  // Enumerate edge subsets that form simple cycles: every touched block has
  // degree exactly two and the subset is connected.
  for (unsigned mask = 1; mask < (1u << ns); ++mask) {
    int edge_count = __builtin_popcount(mask);
    if (edge_count < 2) continue;
    std::vector<int> degree(nb, 0);
    bool ok = true;
    for (int s = 0; s < ns && ok; ++s) {
      if (!(mask >> s & 1)) continue;
      ++degree[net.switch_blocks[s].first];
      ++degree[net.switch_blocks[s].second];
    }
    int touched = 0;
    for (int b = 0; b < nb && ok; ++b) {
      if (degree[b] == 0) continue;
      if (degree[b] != 2) ok = false;
      ++touched;
    }
    if (!ok || touched != edge_count) continue;
    // Connectivity of the chosen edges.
    std::vector<int> stack;
    std::vector<char> seen_block(nb, 0), seen_edge(ns, 0);
    int first_block = -1;
    for (int s = 0; s < ns; ++s)
      if (mask >> s & 1) {
        first_block = net.switch_blocks[s].first;
        break;
      }
    stack.push_back(first_block);
    seen_block[first_block] = 1;
    int reached_edges = 0;
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      for (int s = 0; s < ns; ++s) {
        if (!(mask >> s & 1) || seen_edge[s]) continue;
        auto [u, v] = net.switch_blocks[s];
        if (u != b && v != b) continue;
        seen_edge[s] = 1;
        ++reached_edges;
        int other = u == b ? v : u;
        if (!seen_block[other]) {
          seen_block[other] = 1;
          stack.push_back(other);
        }
      }
    }
    if (reached_edges != edge_count) continue;

    std::vector<lp::Entry> lhs;
    for (int s = 0; s < ns; ++s)
      if (mask >> s & 1) lhs.push_back({m.vars.require({VarKind::SwitchClosed, s}), 1.0});
    m.add_row(std::move(lhs), lp::Sense::LE, edge_count - 1.0, {},
              "radiality.cycle[" + std::to_string(mask) + "]", true);
  }
}

void add_coloring(Model& m, const NetworkCase& net, const FormulationOptions& opt) {
  int nb = static_cast<int>(net.blocks.size());
  int ns = static_cast<int>(net.switches.size());
  double kd = static_cast<double>(opt.k_der);
  auto zsw = [&](int s) { return VarKey{VarKind::SwitchClosed, s}; };
  auto zbl = [&](int l) { return VarKey{VarKind::BlockEnergized, l}; };
  auto zinv = [&](int g) { return VarKey{VarKind::GridForming, g}; };
  auto color = [&](int s, int l) { return VarKey{VarKind::SwitchColor, s, l}; };

  // Closed switches join blocks with equal energization state.
  for (int s = 0; s < ns; ++s) {
    auto [i, j] = net.switch_blocks[s];
    int ci = m.vars.require(zbl(i));
    int cj = m.vars.require(zbl(j));
    int cs = m.vars.require(zsw(s));
    m.add_row({{ci, 1.0}, {cj, -1.0}, {cs, 1.0}}, lp::Sense::LE, 1.0, {},
              "link_energization[" + net.switches[s].id + "].a", true);
    m.add_row({{cj, 1.0}, {ci, -1.0}, {cs, 1.0}}, lp::Sense::LE, 1.0, {},
              "link_energization[" + net.switches[s].id + "].b", true);
  }

  // Generator capacity gated by the block state.
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    int l = net.block_of_bus[gen.bus];
    gen.phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      int pcol = m.vars.require({VarKind::GenP, static_cast<int>(g), -1, static_cast<int8_t>(ip)});
      int qcol = m.vars.require({VarKind::GenQ, static_cast<int>(g), -1, static_cast<int8_t>(ip)});
      std::string base = "gen_capacity[" + gen.id + "," + std::string(1, phase_char(ph)) + "]";
      m.add_row({{pcol, 1.0}}, lp::Sense::LE, 0.0, {{zbl(l), gen.s_max[ip].p}}, base + ".p.ub",
                true);
      m.add_row({{pcol, 1.0}}, lp::Sense::GE, 0.0, {{zbl(l), gen.s_min[ip].p}}, base + ".p.lb",
                true);
      m.add_row({{qcol, 1.0}}, lp::Sense::LE, 0.0, {{zbl(l), gen.s_max[ip].q}}, base + ".q.ub",
                true);
      m.add_row({{qcol, 1.0}}, lp::Sense::GE, 0.0, {{zbl(l), gen.s_min[ip].q}}, base + ".q.lb",
                true);
    });
  }

  // Grid-forming counts per block: an energized block without a closed switch
  // needs its own source, and never hosts more than k_der of them.
  for (int l = 0; l < nb; ++l) {
    auto adj = switches_at_block(net, l);
    std::vector<lp::Entry> lo;
    lo.push_back({m.vars.require(zbl(l)), 1.0});
    for (int s : adj) lo.push_back({m.vars.require(zsw(s)), -1.0});
    for (int g : net.blocks[l].generators) lo.push_back({m.vars.require(zinv(g)), -1.0});
    m.add_row(std::move(lo), lp::Sense::LE, 0.0, {}, "gf_lower[" + std::to_string(l) + "]", true);

    std::vector<lp::Entry> hi;
    for (int g : net.blocks[l].generators) hi.push_back({m.vars.require(zinv(g)), 1.0});
    hi.push_back({m.vars.require(zbl(l)), -kd});
    m.add_row(std::move(hi), lp::Sense::LE, 0.0, {}, "gf_upper[" + std::to_string(l) + "]", true);
  }

  // A closed switch carries at most k_der colors; an open switch carries none.
  for (int s = 0; s < ns; ++s) {
    std::vector<lp::Entry> lhs;
    for (int l = 0; l < nb; ++l) lhs.push_back({m.vars.require(color(s, l)), 1.0});
    lhs.push_back({m.vars.require(zsw(s)), -kd});
    m.add_row(std::move(lhs), lp::Sense::LE, 0.0, {},
              "switch_color_cap[" + net.switches[s].id + "]", true);
  }

  // A closed switch adjacent to block l is colored l exactly when l hosts a
  // grid-forming source (with slack while the switch is open).
  for (int l = 0; l < nb; ++l) {
    for (int s : switches_at_block(net, l)) {
      std::string base =
          "color_requires_gf[" + net.switches[s].id + "," + std::to_string(l) + "]";
      std::vector<lp::Entry> lo;
      lo.push_back({m.vars.require(color(s, l)), 1.0});
      lo.push_back({m.vars.require(zsw(s)), 1.0});
      for (int g : net.blocks[l].generators) lo.push_back({m.vars.require(zinv(g)), -1.0});
      m.add_row(std::move(lo), lp::Sense::LE, 1.0, {}, base + ".lo", true);

      std::vector<lp::Entry> hi;
      for (int g : net.blocks[l].generators) hi.push_back({m.vars.require(zinv(g)), 1.0});
      hi.push_back({m.vars.require(color(s, l)), -kd});
      hi.push_back({m.vars.require(zsw(s)), kd});
      m.add_row(std::move(hi), lp::Sense::LE, kd, {}, base + ".hi", true);
    }
  }

  // Closed switches sharing a block agree on every color.
  for (int l = 0; l < nb; ++l) {
    auto adj = switches_at_block(net, l);
    for (size_t i = 0; i < adj.size(); ++i) {
      for (size_t j = i + 1; j < adj.size(); ++j) {
        int e = adj[i], f = adj[j];
        for (int lc = 0; lc < nb; ++lc) {
          std::string base = "color_consistency[" + std::to_string(l) + "," +
                             net.switches[e].id + "," + net.switches[f].id + "," +
                             std::to_string(lc) + "]";
          int ye = m.vars.require(color(e, lc));
          int yf = m.vars.require(color(f, lc));
          int ze = m.vars.require(zsw(e));
          int zf = m.vars.require(zsw(f));
          m.add_row({{ye, 1.0}, {yf, -1.0}, {ze, 1.0}, {zf, 1.0}}, lp::Sense::LE, 2.0, {},
                    base + ".a", true);
          m.add_row({{yf, 1.0}, {ye, -1.0}, {ze, 1.0}, {zf, 1.0}}, lp::Sense::LE, 2.0, {},
                    base + ".b", true);
        }
      }
    }
  }

  // No color without a grid-forming source in the coloring block.
  for (int s = 0; s < ns; ++s) {
    for (int l = 0; l < nb; ++l) {
      std::vector<lp::Entry> lhs;
      lhs.push_back({m.vars.require(color(s, l)), 1.0});
      for (int g : net.blocks[l].generators) lhs.push_back({m.vars.require(zinv(g)), -1.0});
      m.add_row(std::move(lhs), lp::Sense::LE, 0.0, {},
                "color_needs_source[" + net.switches[s].id + "," + std::to_string(l) + "]", true);
    }
  }

  // An energized block hosts a source or touches a colored switch.
  for (int l = 0; l < nb; ++l) {
    std::vector<lp::Entry> lhs;
    lhs.push_back({m.vars.require(zbl(l)), 1.0});
    for (int g : net.blocks[l].generators) lhs.push_back({m.vars.require(zinv(g)), -1.0});
    for (int s : switches_at_block(net, l))
      for (int lc = 0; lc < nb; ++lc) lhs.push_back({m.vars.require(color(s, lc)), -1.0});
    m.add_row(std::move(lhs), lp::Sense::LE, 0.0, {},
              "energized_needs_source[" + std::to_string(l) + "]", true);
  }

  if (nb >= 2) {
    double big = static_cast<double>(ns);
    // Commodity flow caps on closed switches.
    for (int l = 0; l < nb; ++l) {
      for (int s = 0; s < ns; ++s) {
        int eta = m.vars.require({VarKind::CommodityFlow, s, l});
        int zs = m.vars.require(zsw(s));
        std::string base =
            "commodity_switch_cap[" + net.switches[s].id + "," + std::to_string(l) + "]";
        m.add_row({{eta, 1.0}, {zs, -big}}, lp::Sense::LE, 0.0, {}, base + ".ub", true);
        m.add_row({{eta, 1.0}, {zs, big}}, lp::Sense::GE, 0.0, {}, base + ".lb", true);
      }
    }
    // Every block sources one unit of its commodity for every other block,
    // delivered through closed switches or absorbed by the virtual edge.
    for (int l = 0; l < nb; ++l) {
      std::vector<lp::Entry> supply;
      for (int s = 0; s < ns; ++s) {
        auto [u, v] = net.switch_blocks[s];
        if (u == l) supply.push_back({m.vars.require({VarKind::CommodityFlow, s, l}), 1.0});
        if (v == l) supply.push_back({m.vars.require({VarKind::CommodityFlow, s, l}), -1.0});
      }
      for (int lp2 = 0; lp2 < nb; ++lp2)
        if (lp2 != l) supply.push_back({m.vars.require({VarKind::VirtualFlow, l, lp2}), 1.0});
      // Implied by the per-destination rows (their sum), so it may stay lazy;
      // keeping it out of the active set removes a rank deficiency.
      m.add_row(std::move(supply), lp::Sense::EQ, nb - 1.0, {},
                "commodity_supply[" + std::to_string(l) + "]", true);

      for (int lp2 = 0; lp2 < nb; ++lp2) {
        if (lp2 == l) continue;
        std::vector<lp::Entry> demand;
        for (int s = 0; s < ns; ++s) {
          auto [u, v] = net.switch_blocks[s];
          if (u == lp2) demand.push_back({m.vars.require({VarKind::CommodityFlow, s, l}), 1.0});
          if (v == lp2) demand.push_back({m.vars.require({VarKind::CommodityFlow, s, l}), -1.0});
        }
        demand.push_back({m.vars.require({VarKind::VirtualFlow, l, lp2}), -1.0});
        m.add_row(std::move(demand), lp::Sense::EQ, -1.0, {},
                  "commodity_demand[" + std::to_string(l) + "," + std::to_string(lp2) + "]");
      }
    }
    // Virtual-edge flow forbids coloring across disconnected blocks.
    for (int l = 0; l < nb; ++l) {
      for (int lp2 = 0; lp2 < nb; ++lp2) {
        if (lp2 == l) continue;
        for (int s : switches_at_block(net, lp2)) {
          m.add_row({{m.vars.require(color(s, l)), 1.0},
                     {m.vars.require({VarKind::VirtualFlow, l, lp2}), 1.0}},
                    lp::Sense::LE, 1.0, {},
                    "color_virtual_block[" + std::to_string(l) + "," + std::to_string(lp2) + "," +
                        net.switches[s].id + "]", true);
        }
      }
    }
  }
}

}  // namespace rpop::form
