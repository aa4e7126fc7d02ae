#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "rpop/formulation.hpp"
#include "rpop/net_model.hpp"

namespace rpop::test {

/// Synthetic block-structured case: one single-phase bus per block, switches
/// between block buses, a configurable number of DERs per block. Loads are
/// irrelevant for the topology semantics and omitted.
struct BlockCaseSpec {
  int num_blocks = 1;
  std::vector<std::pair<int, int>> switch_edges;
  std::vector<int> ders_per_block;
};

inline NetworkCase make_block_case(const BlockCaseSpec& spec) {
  NetworkCase c;
  c.name = "synthetic";
  for (int b = 0; b < spec.num_blocks; ++b) {
    Bus bus;
    bus.id = "t" + std::to_string(b);
    bus.phases = PhaseSet::parse("a", bus.id);
    bus.v_min = 0.8;
    bus.v_max = 1.2;
    c.buses.push_back(bus);
  }
  for (size_t s = 0; s < spec.switch_edges.size(); ++s) {
    Switch sw;
    sw.id = "s" + std::to_string(s);
    sw.from_bus = spec.switch_edges[s].first;
    sw.to_bus = spec.switch_edges[s].second;
    sw.phases = PhaseSet::parse("a", sw.id);
    sw.s_max = {5.0, 5.0, 5.0};
    c.switches.push_back(sw);
  }
  int gid = 0;
  for (int b = 0; b < spec.num_blocks; ++b) {
    int count = b < static_cast<int>(spec.ders_per_block.size()) ? spec.ders_per_block[b] : 0;
    for (int k = 0; k < count; ++k) {
      Generator g;
      g.id = "g" + std::to_string(gid++);
      g.bus = b;
      g.phases = PhaseSet::parse("a", g.id);
      g.s_min = {};
      g.s_max = {PQ{1.0, 0.5}, PQ{1.0, 0.5}, PQ{1.0, 0.5}};
      g.c1 = 1.0;
      c.generators.push_back(g);
    }
  }
  c.finalize();
  return c;
}

/// A closed-switch assignment is radial exactly when it contains no cycle of
/// the block multigraph.
inline bool radiality_declarative(const NetworkCase& c, const std::vector<char>& z_sw) {
  std::vector<int> parent(c.blocks.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (size_t s = 0; s < c.switches.size(); ++s) {
    if (!z_sw[s]) continue;
    int a = find(c.switch_blocks[s].first);
    int b = find(c.switch_blocks[s].second);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

/// Declarative grid-forming semantics: energization is constant across each
/// connected component, every energized component hosts between one and k_der
/// grid-forming DERs, and de-energized blocks host none.
inline bool coloring_declarative(const NetworkCase& c, const std::vector<char>& z_sw,
                                 const std::vector<char>& z_bl, const std::vector<char>& z_inv,
                                 int k_der) {
  for (size_t s = 0; s < c.switches.size(); ++s) {
    if (!z_sw[s]) continue;
    if (z_bl[c.switch_blocks[s].first] != z_bl[c.switch_blocks[s].second]) return false;
  }
  for (size_t l = 0; l < c.blocks.size(); ++l) {
    if (z_bl[l]) continue;
    for (int g : c.blocks[l].generators)
      if (z_inv[g]) return false;
  }
  for (const auto& comp : connected_components(c, z_sw)) {
    bool energized = z_bl[comp.front()];
    if (!energized) continue;
    int gf = 0;
    for (int l : comp)
      for (int g : c.blocks[l].generators) gf += z_inv[g] ? 1 : 0;
    if (gf < 1 || gf > k_der) return false;
  }
  return true;
}

/// Feasibility checker for fixed binaries against the emitted constraint
/// rows, with the auxiliaries (colors, commodity and virtual flows) relaxed
/// to their continuous ranges.
class ColoringChecker {
public:
  ColoringChecker(const NetworkCase& c, int k_der) : net_(c) {
    form::FormulationOptions opt;
    opt.k_der = k_der;
    namespace f = rpop::form;
    auto& m = model_;
    for (size_t s = 0; s < c.switches.size(); ++s) {
      f::VarKey k{f::VarKind::SwitchClosed, static_cast<int>(s)};
      m.vars.add(m.lp, k, 0.0, 1.0, 0.0, f::key_name(k, c));
    }
    for (size_t l = 0; l < c.blocks.size(); ++l) {
      f::VarKey k{f::VarKind::BlockEnergized, static_cast<int>(l)};
      m.vars.add(m.lp, k, 0.0, 1.0, 0.0, f::key_name(k, c));
    }
    for (size_t g = 0; g < c.generators.size(); ++g) {
      f::VarKey k{f::VarKind::GridForming, static_cast<int>(g)};
      m.vars.add(m.lp, k, 0.0, 1.0, 0.0, f::key_name(k, c));
    }
    num_fixed_ = static_cast<int>(m.lp.num_vars);
    for (size_t s = 0; s < c.switches.size(); ++s)
      for (size_t l = 0; l < c.blocks.size(); ++l) {
        f::VarKey k{f::VarKind::SwitchColor, static_cast<int>(s), static_cast<int>(l)};
        m.vars.add(m.lp, k, 0.0, 1.0, 0.0, f::key_name(k, c));
      }
    if (c.blocks.size() >= 2) {
      double big = static_cast<double>(c.switches.size());
      for (size_t l = 0; l < c.blocks.size(); ++l)
        for (size_t s = 0; s < c.switches.size(); ++s) {
          f::VarKey k{f::VarKind::CommodityFlow, static_cast<int>(s), static_cast<int>(l)};
          m.vars.add(m.lp, k, -big, big, 0.0, f::key_name(k, c));
        }
      for (size_t l = 0; l < c.blocks.size(); ++l)
        for (size_t l2 = 0; l2 < c.blocks.size(); ++l2) {
          if (l == l2) continue;
          f::VarKey k{f::VarKind::VirtualFlow, static_cast<int>(l), static_cast<int>(l2)};
          m.vars.add(m.lp, k, 0.0, 1.0, 0.0, f::key_name(k, c));
        }
    }
    for (size_t g = 0; g < c.generators.size(); ++g) {
      const Generator& gen = c.generators[g];
      gen.phases.for_each([&](Phase ph) {
        int ip = static_cast<int>(ph);
        f::VarKey kp{f::VarKind::GenP, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)};
        f::VarKey kq{f::VarKind::GenQ, static_cast<int>(g), -1, static_cast<std::int8_t>(ph)};
        m.vars.add(m.lp, kp, std::min(0.0, gen.s_min[ip].p), std::max(0.0, gen.s_max[ip].p), 0.0,
                   f::key_name(kp, c));
        m.vars.add(m.lp, kq, std::min(0.0, gen.s_min[ip].q), std::max(0.0, gen.s_max[ip].q), 0.0,
                   f::key_name(kq, c));
      });
    }
    form::add_coloring(m, c, opt);
  }

  bool feasible(const std::vector<char>& z_sw, const std::vector<char>& z_bl,
                const std::vector<char>& z_inv) {
    auto& prog = model_.lp;
    int ns = static_cast<int>(net_.switches.size());
    int nb = static_cast<int>(net_.blocks.size());
    for (int s = 0; s < ns; ++s) prog.lower[s] = prog.upper[s] = z_sw[s];
    for (int l = 0; l < nb; ++l) prog.lower[ns + l] = prog.upper[ns + l] = z_bl[l];
    for (size_t g = 0; g < net_.generators.size(); ++g)
      prog.lower[ns + nb + g] = prog.upper[ns + nb + g] = z_inv[g];

    // Rows supported entirely on the fixed binaries are evaluated directly.
    for (const auto& row : prog.rows) {
      bool fixed = true;
      double act = 0.0;
      for (const auto& e : row.coeffs) {
        if (e.col >= num_fixed_) {
          fixed = false;
          break;
        }
        act += e.val * prog.lower[e.col];
      }
      if (!fixed) continue;
      switch (row.sense) {
        case lp::Sense::LE:
          if (act > row.rhs + 1e-9) return false;
          break;
        case lp::Sense::GE:
          if (act < row.rhs - 1e-9) return false;
          break;
        case lp::Sense::EQ:
          if (std::abs(act - row.rhs) > 1e-9) return false;
          break;
      }
    }
    lp::SimplexOptions opt;
    auto sol = lp::solve_lp(prog, opt);
    return sol.status == lp::LpStatus::Optimal;
  }

private:
  const NetworkCase& net_;
  form::Model model_{form::Context::Master};
  int num_fixed_ = 0;
};

struct EquivalenceStats {
  long checked = 0;
  long mismatches = 0;
};

/// Exhaustive projection equivalence between the emitted coloring rows and
/// the declarative semantics, over every binary assignment of one instance.
inline EquivalenceStats run_coloring_equivalence(const NetworkCase& c, int k_der) {
  EquivalenceStats stats;
  ColoringChecker checker(c, k_der);
  int ns = static_cast<int>(c.switches.size());
  int nb = static_cast<int>(c.blocks.size());
  int ng = static_cast<int>(c.generators.size());
  int bits = ns + nb + ng;
  for (long mask = 0; mask < (1L << bits); ++mask) {
    std::vector<char> z_sw(ns), z_bl(nb), z_inv(ng);
    for (int s = 0; s < ns; ++s) z_sw[s] = (mask >> s) & 1;
    for (int l = 0; l < nb; ++l) z_bl[l] = (mask >> (ns + l)) & 1;
    for (int g = 0; g < ng; ++g) z_inv[g] = (mask >> (ns + nb + g)) & 1;
    bool expect = coloring_declarative(c, z_sw, z_bl, z_inv, k_der);
    bool got = checker.feasible(z_sw, z_bl, z_inv);
    ++stats.checked;
    if (expect != got) ++stats.mismatches;
  }
  return stats;
}

inline EquivalenceStats run_radiality_equivalence(const NetworkCase& c) {
  EquivalenceStats stats;
  form::Model m(form::Context::Master);
  for (size_t s = 0; s < c.switches.size(); ++s) {
    form::VarKey k{form::VarKind::SwitchClosed, static_cast<int>(s)};
    m.vars.add(m.lp, k, 0.0, 1.0, 0.0, form::key_name(k, c));
  }
  form::add_radiality(m, c);
  int ns = static_cast<int>(c.switches.size());
  for (long mask = 0; mask < (1L << ns); ++mask) {
    std::vector<char> z_sw(ns);
    for (int s = 0; s < ns; ++s) z_sw[s] = (mask >> s) & 1;
    bool ok = true;
    for (const auto& row : m.lp.rows) {
      double act = 0.0;
      for (const auto& e : row.coeffs) act += e.val * z_sw[e.col];
      if (act > row.rhs + 1e-9) ok = false;
    }
    bool expect = radiality_declarative(c, z_sw);
    ++stats.checked;
    if (ok != expect) ++stats.mismatches;
  }
  return stats;
}

/// Every connected topology with at most three blocks, three switches and
/// three DERs; 220 instances in a deterministic order.
inline std::vector<BlockCaseSpec> enumerate_small_topologies() {
  std::vector<BlockCaseSpec> out;
  auto der_splits = [](int blocks) {
    std::vector<std::vector<int>> splits;
    std::vector<int> cur(blocks, 0);
    // All distributions with total in [1, 3].
    std::function<void(int, int)> rec = [&](int idx, int remaining) {
      if (idx == blocks) {
        int total = 0;
        for (int v : cur) total += v;
        if (total >= 1) splits.push_back(cur);
        return;
      }
      for (int v = 0; v <= remaining; ++v) {
        cur[idx] = v;
        rec(idx + 1, remaining - v);
      }
      cur[idx] = 0;
    };
    rec(0, 3);
    return splits;
  };

  // One block: no switches possible.
  for (const auto& d : der_splits(1)) out.push_back({1, {}, d});

  // Two blocks: 1..3 parallel switches.
  for (int par = 1; par <= 3; ++par) {
    std::vector<std::pair<int, int>> edges(par, {0, 1});
    for (const auto& d : der_splits(2)) out.push_back({2, edges, d});
  }

  // Three blocks: connected multigraphs over {01, 02, 12} with 2..3 edges.
  std::vector<std::pair<int, int>> pairs{{0, 1}, {0, 2}, {1, 2}};
  std::vector<std::vector<std::pair<int, int>>> topologies;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) topologies.push_back({pairs[a], pairs[b]});
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b)
      for (int cc = b; cc < 3; ++cc) topologies.push_back({pairs[a], pairs[b], pairs[cc]});
  for (const auto& topo : topologies) {
    // Connected iff at least two distinct pair types appear.
    bool two_types = false;
    for (size_t i = 1; i < topo.size(); ++i)
      if (topo[i] != topo[0]) two_types = true;
    if (!two_types) continue;
    for (const auto& d : der_splits(3)) out.push_back({3, topo, d});
  }
  return out;
}

}  // namespace rpop::test
