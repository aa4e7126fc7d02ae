#include "rpop/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rpop {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a < b) std::swap(a, b);  // keep the smaller index as root
    parent[a] = b;
    return true;
  }
};

void check_positive_smax(const std::array<double, 3>& s_max, PhaseSet phases,
                         const std::string& id) {
  phases.for_each([&](Phase p) {
    if (!(s_max[static_cast<int>(p)] > 0.0))
      throw CaseError(CaseError::Kind::Invariant, id, "s_max",
                      id + ": s_max must be positive on phase " + std::string(1, phase_char(p)));
  });
}

}  // namespace

int NetworkCase::bus_index(const std::string& id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  return -1;
}

int NetworkCase::switch_index(const std::string& id) const {
  for (size_t i = 0; i < switches.size(); ++i)
    if (switches[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<Block> compute_blocks(const NetworkCase& c) {
  int n = static_cast<int>(c.buses.size());
  UnionFind uf(n);
  for (const auto& l : c.lines) uf.unite(l.from_bus, l.to_bus);
  for (const auto& t : c.transformers) uf.unite(t.from_bus, t.to_bus);

  // Group buses by root, then order groups by smallest contained bus id.
  std::vector<std::vector<int>> groups;
  std::vector<int> group_of(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = uf.find(i);
    if (group_of[r] < 0) {
      group_of[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[r]].push_back(i);
  }
  std::vector<int> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  auto min_id = [&](int g) -> const std::string& {
    int best = groups[g][0];
    for (int b : groups[g])
      if (c.buses[b].id < c.buses[best].id) best = b;
    return c.buses[best].id;
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return min_id(a) < min_id(b); });

  std::vector<Block> blocks;
  blocks.reserve(groups.size());
  for (size_t k = 0; k < order.size(); ++k) {
    Block b;
    b.id = static_cast<int>(k);
    b.buses = groups[order[k]];
    std::sort(b.buses.begin(), b.buses.end());
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<std::vector<int>> connected_components(const NetworkCase& c,
                                                   const std::vector<char>& closed) {
  int nb = static_cast<int>(c.blocks.size());
  UnionFind uf(nb);
  for (size_t s = 0; s < c.switches.size(); ++s) {
    if (s < closed.size() && closed[s])
      uf.unite(c.switch_blocks[s].first, c.switch_blocks[s].second);
  }
  std::vector<std::vector<int>> comps;
  std::vector<int> comp_of(nb, -1);
  for (int b = 0; b < nb; ++b) {
    int r = uf.find(b);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[comp_of[r]].push_back(b);
  }
  // Roots are visited in ascending block id, so components are already
  // ordered by smallest contained block.
  return comps;
}

std::vector<std::vector<int>> connected_components(const NetworkCase& c,
                                                   const std::set<std::string>& closed_switches) {
  std::vector<char> closed(c.switches.size(), 0);
  for (const auto& id : closed_switches) {
    int s = c.switch_index(id);
    if (s < 0)
      throw CaseError(CaseError::Kind::Schema, id, "switch", "unknown switch id '" + id + "'");
    closed[s] = 1;
  }
  return connected_components(c, closed);
}

void NetworkCase::compute_weights(double alpha_base, double alpha_per_load) {
  for (auto& b : blocks) b.weight = alpha_base + alpha_per_load * static_cast<double>(b.loads.size());
}

void NetworkCase::finalize(double alpha_base, double alpha_per_load) {
  // Unique bus ids.
  for (size_t i = 0; i < buses.size(); ++i)
    for (size_t j = i + 1; j < buses.size(); ++j)
      if (buses[i].id == buses[j].id)
        throw CaseError(CaseError::Kind::Invariant, buses[i].id, "id",
                        "duplicate bus id '" + buses[i].id + "'");

  for (const auto& b : buses) {
    if (!(0.0 < b.v_min && b.v_min < b.v_max))
      throw CaseError(CaseError::Kind::Invariant, b.id, "v_min",
                      b.id + ": requires 0 < v_min < v_max");
    for (Phase p : kAllPhases) {
      const Shunt& sh = b.shunt[static_cast<int>(p)];
      if (!b.phases.contains(p) && (sh.g != 0.0 || sh.b != 0.0))
        throw CaseError(CaseError::Kind::Invariant, b.id, "shunt",
                        b.id + ": shunt on absent phase " + std::string(1, phase_char(p)));
    }
  }

  auto check_endpoints = [&](const std::string& id, int from, int to, PhaseSet phases) {
    if (from < 0 || from >= static_cast<int>(buses.size()) || to < 0 ||
        to >= static_cast<int>(buses.size()))
      throw CaseError(CaseError::Kind::Schema, id, "from", id + ": unknown endpoint bus");
    if (from == to)
      throw CaseError(CaseError::Kind::Invariant, id, "to", id + ": endpoints must differ");
    if (!phases.subset_of(buses[from].phases) || !phases.subset_of(buses[to].phases))
      throw CaseError(CaseError::Kind::Invariant, id, "phases",
                      id + ": phases exceed endpoint bus phases");
  };

  for (const auto& l : lines) {
    check_endpoints(l.id, l.from_bus, l.to_bus, l.phases);
    check_positive_smax(l.s_max, l.phases, l.id);
    l.phases.for_each([&](Phase a) {
      int ia = static_cast<int>(a);
      if (!(l.r[ia][ia] > 0.0) || !(l.x[ia][ia] > 0.0))
        throw CaseError(CaseError::Kind::Invariant, l.id, "r",
                        l.id + ": diagonal impedance entries must be positive");
      l.phases.for_each([&](Phase b) {
        int ib = static_cast<int>(b);
        if (std::abs(l.r[ia][ib] - l.r[ib][ia]) > 1e-12 ||
            std::abs(l.x[ia][ib] - l.x[ib][ia]) > 1e-12)
          throw CaseError(CaseError::Kind::Invariant, l.id, "r",
                          l.id + ": impedance matrices must be symmetric");
      });
    });
  }
  for (const auto& s : switches) {
    check_endpoints(s.id, s.from_bus, s.to_bus, s.phases);
    check_positive_smax(s.s_max, s.phases, s.id);
  }
  for (const auto& t : transformers) {
    check_endpoints(t.id, t.from_bus, t.to_bus, t.phases);
    check_positive_smax(t.s_max, t.phases, t.id);
    if (!(t.tap_ratio > 0.0))
      throw CaseError(CaseError::Kind::Invariant, t.id, "tap_ratio",
                      t.id + ": tap ratio must be positive");
    if (t.connection == XfmrConnection::Delta && t.phases.count() != 3)
      throw CaseError(CaseError::Kind::Invariant, t.id, "phases",
                      t.id + ": delta transformers require all three phases");
  }
  for (const auto& d : loads) {
    if (d.bus < 0 || d.bus >= static_cast<int>(buses.size()))
      throw CaseError(CaseError::Kind::Schema, d.id, "bus", d.id + ": unknown bus");
    if (!d.phases.subset_of(buses[d.bus].phases))
      throw CaseError(CaseError::Kind::Invariant, d.id, "phases",
                      d.id + ": phases exceed bus phases");
    d.phases.for_each([&](Phase p) {
      int ip = static_cast<int>(p);
      if (d.s_lower[ip].p > d.s_nominal[ip].p + 1e-12 ||
          d.s_lower[ip].q > d.s_nominal[ip].q + 1e-12 ||
          d.s_nominal[ip].p > d.s_upper[ip].p + 1e-12 ||
          d.s_nominal[ip].q > d.s_upper[ip].q + 1e-12)
        throw CaseError(CaseError::Kind::Invariant, d.id, "s_lower",
                        d.id + ": requires s_lower <= s_nominal <= s_upper componentwise");
      if (!d.uncertain && (d.s_lower[ip] != d.s_nominal[ip] || d.s_upper[ip] != d.s_nominal[ip]))
        throw CaseError(CaseError::Kind::Invariant, d.id, "uncertain",
                        d.id + ": fixed loads require s_lower = s_nominal = s_upper");
    });
  }
  if (generators.empty())
    throw CaseError(CaseError::Kind::Invariant, name, "generators",
                    "case requires at least one generator");
  for (const auto& g : generators) {
    if (g.bus < 0 || g.bus >= static_cast<int>(buses.size()))
      throw CaseError(CaseError::Kind::Schema, g.id, "bus", g.id + ": unknown bus");
    if (!g.phases.subset_of(buses[g.bus].phases))
      throw CaseError(CaseError::Kind::Invariant, g.id, "phases",
                      g.id + ": phases exceed bus phases");
    g.phases.for_each([&](Phase p) {
      int ip = static_cast<int>(p);
      if (g.s_min[ip].p > g.s_max[ip].p + 1e-12 || g.s_min[ip].q > g.s_max[ip].q + 1e-12)
        throw CaseError(CaseError::Kind::Invariant, g.id, "s_min",
                        g.id + ": requires s_min <= s_max componentwise");
    });
    if (g.c1 < 0.0)
      throw CaseError(CaseError::Kind::Invariant, g.id, "c1", g.id + ": c1 must be nonnegative");
    if (!(g.ramp_fraction > 0.0 && g.ramp_fraction <= 1.0))
      throw CaseError(CaseError::Kind::Invariant, g.id, "ramp_fraction",
                      g.id + ": ramp_fraction must lie in (0, 1]");
  }

  // Block decomposition and memberships.
  blocks = compute_blocks(*this);
  block_of_bus.assign(buses.size(), -1);
  for (const auto& b : blocks)
    for (int bus : b.buses) block_of_bus[bus] = b.id;
  for (size_t d = 0; d < loads.size(); ++d) blocks[block_of_bus[loads[d].bus]].loads.push_back(d);
  for (size_t g = 0; g < generators.size(); ++g)
    blocks[block_of_bus[generators[g].bus]].generators.push_back(g);
  compute_weights(alpha_base, alpha_per_load);

  switch_blocks.clear();
  for (const auto& s : switches) {
    int bf = block_of_bus[s.from_bus];
    int bt = block_of_bus[s.to_bus];
    if (bf == bt)
      throw CaseError(CaseError::Kind::Invariant, s.id, "from",
                      s.id + ": switch endpoints lie in the same block");
    switch_blocks.emplace_back(bf, bt);
  }

  // Connectivity with every switch closed.
  {
    UnionFind uf(static_cast<int>(buses.size()));
    int comp = static_cast<int>(buses.size());
    for (const auto& l : lines) comp -= uf.unite(l.from_bus, l.to_bus) ? 1 : 0;
    for (const auto& t : transformers) comp -= uf.unite(t.from_bus, t.to_bus) ? 1 : 0;
    for (const auto& s : switches) comp -= uf.unite(s.from_bus, s.to_bus) ? 1 : 0;
    if (comp != 1 && !buses.empty())
      throw CaseError(CaseError::Kind::Invariant, name, "buses",
                      "network must be connected with all switches closed");
  }

  // Structural warnings.
  warnings.clear();
  {
    std::vector<int> sw_count(blocks.size(), 0);
    for (const auto& sb : switch_blocks) {
      ++sw_count[sb.first];
      ++sw_count[sb.second];
    }
    for (const auto& b : blocks) {
      if (b.generators.empty() && sw_count[b.id] == 0)
        warnings.push_back("block " + std::to_string(b.id) +
                           " has no generator and no switch; it is structurally de-energized");
    }
  }

  // Edge views for the physics builders.
  edges.clear();
  for (size_t i = 0; i < lines.size(); ++i)
    edges.push_back({EdgeKind::Line, static_cast<int>(i), lines[i].from_bus, lines[i].to_bus,
                     lines[i].phases});
  for (size_t i = 0; i < switches.size(); ++i)
    edges.push_back({EdgeKind::Switch, static_cast<int>(i), switches[i].from_bus,
                     switches[i].to_bus, switches[i].phases});
  for (size_t i = 0; i < transformers.size(); ++i) {
    edges.push_back({EdgeKind::XfmrFrom, static_cast<int>(i), transformers[i].from_bus,
                     transformers[i].to_bus, transformers[i].phases});
    edges.push_back({EdgeKind::XfmrTo, static_cast<int>(i), transformers[i].to_bus,
                     transformers[i].from_bus, transformers[i].phases});
  }
}

}  // namespace rpop
