#pragma once

#include <optional>
#include <vector>

#include "oracles.hpp"
#include "rpop/robust.hpp"

namespace rpop::test {

/// Exhaustive two-stage oracle: enumerates every declaratively feasible
/// binary configuration, and for each solves one joined linear program that
/// chooses the set-points against the worst extreme scenario:
///
///   min  first-stage cost(z, s_g) + t
///   s.t. nominal physics at z (no slacks), capacity gating,
///        recourse physics per extreme scenario with shared s_g,
///        t >= recourse objective of each scenario.
///
/// Independent of the cutting-plane path: no master relaxation, no cuts, no
/// worst-case search; scenarios come from direct vertex enumeration.
class TwoStageOracle {
public:
  TwoStageOracle(const NetworkCase& net, const robust::UncertaintySet& u,
                 const form::FormulationOptions& opt)
      : net_(net), u_(u), opt_(opt) {}

  struct Best {
    double objective = kInf;
    std::vector<char> z_sw, z_bl, z_inv;
    long combos_checked = 0;
    long combos_feasible = 0;
  };

  Best search(bool fix_topology = false) const {
    int ns = static_cast<int>(net_.switches.size());
    int nb = static_cast<int>(net_.blocks.size());
    int ng = static_cast<int>(net_.generators.size());
    Best best;
    for (long mask = 0; mask < (1L << (ns + nb + ng)); ++mask) {
      std::vector<char> z_sw(ns), z_bl(nb), z_inv(ng);
      for (int s = 0; s < ns; ++s) z_sw[s] = (mask >> s) & 1;
      for (int l = 0; l < nb; ++l) z_bl[l] = (mask >> (ns + l)) & 1;
      for (int g = 0; g < ng; ++g) z_inv[g] = (mask >> (ns + nb + g)) & 1;
      if (fix_topology) {
        bool match = true;
        for (int s = 0; s < ns; ++s)
          if (z_sw[s] != (net_.switches[s].normally_closed ? 1 : 0)) match = false;
        if (!match) continue;
      }
      ++best.combos_checked;
      if (!radiality_declarative(net_, z_sw)) continue;
      if (!coloring_declarative(net_, z_sw, z_bl, z_inv, opt_.k_der)) continue;
      auto value = evaluate_config(z_sw, z_bl, z_inv);
      if (!value.has_value()) continue;
      ++best.combos_feasible;
      if (*value < best.objective) {
        best.objective = *value;
        best.z_sw = z_sw;
        best.z_bl = z_bl;
        best.z_inv = z_inv;
      }
    }
    return best;
  }

  /// Joined min-max value of one binary configuration; nullopt when the
  /// nominal physics are infeasible at this configuration.
  std::optional<double> evaluate_config(const std::vector<char>& z_sw,
                                        const std::vector<char>& z_bl,
                                        const std::vector<char>& z_inv) const {
    namespace f = rpop::form;
    // Master block with the binaries pinned.
    auto mm = f::build_master(net_, {}, opt_);
    lp::LinearProgram joined = mm.mip.lp;
    for (size_t s = 0; s < net_.switches.size(); ++s) {
      int col = mm.model.vars.require({f::VarKind::SwitchClosed, static_cast<int>(s)});
      joined.lower[col] = joined.upper[col] = z_sw[s];
    }
    for (size_t l = 0; l < net_.blocks.size(); ++l) {
      int col = mm.model.vars.require({f::VarKind::BlockEnergized, static_cast<int>(l)});
      joined.lower[col] = joined.upper[col] = z_bl[l];
    }
    for (size_t g = 0; g < net_.generators.size(); ++g) {
      int col = mm.model.vars.require({f::VarKind::GridForming, static_cast<int>(g)});
      joined.lower[col] = joined.upper[col] = z_inv[g];
    }
    int tcol = joined.add_var(0.0, kInf, 1.0, "t_worst");

    // Dummy first-stage point carrying the binaries; set-points stay zero so
    // the recourse rows keep their s_g sensitivities in row_x.
    f::MasterSolution x0;
    x0.z_sw = z_sw;
    x0.z_bl = z_bl;
    x0.z_inv = z_inv;
    x0.gen_setpoint.assign(net_.generators.size(), {});

    for (const auto& sc : scenario_loads(z_bl)) {
      auto rm = f::build_subproblem(net_, x0, sc, opt_);
      int offset = joined.num_vars;
      const auto& sub = rm.model.lp;
      for (int j = 0; j < sub.num_vars; ++j)
        joined.add_var(sub.lower[j], sub.upper[j], 0.0, "");
      std::vector<lp::Entry> trow{{tcol, 1.0}};
      for (int j = 0; j < sub.num_vars; ++j)
        if (sub.objective[j] != 0.0) trow.push_back({offset + j, -sub.objective[j]});
      for (size_t r = 0; r < sub.rows.size(); ++r) {
        lp::Row row = sub.rows[r];
        for (auto& e : row.coeffs) e.col += offset;
        // Re-attach the set-point sensitivities to the shared s_g columns.
        for (const auto& xt : rm.model.row_x[r]) {
          if (xt.key.kind == f::VarKind::GenP || xt.key.kind == f::VarKind::GenQ)
            row.coeffs.push_back({mm.model.vars.require(xt.key), -xt.coeff});
        }
        joined.add_row(std::move(row));
      }
      joined.add_row(std::move(trow), lp::Sense::GE, 0.0, "t_bound");
    }

    lp::SimplexOptions sopt;
    auto sol = lp::solve_lp(joined, sopt);
    if (sol.status != lp::LpStatus::Optimal) return std::nullopt;
    return sol.objective;
  }

  /// Vertex load realizations over the uncertain loads in energized blocks.
  std::vector<form::LoadVector> scenario_loads(const std::vector<char>& z_bl) const {
    std::vector<int> active;
    for (size_t k = 0; k < u_.uncertain.size(); ++k)
      if (z_bl[net_.block_of_bus[net_.loads[u_.uncertain[k]].bus]])
        active.push_back(static_cast<int>(k));
    std::vector<form::LoadVector> out;
    for (long mask = 0; mask < (1L << active.size()); ++mask) {
      form::LoadVector lv(net_.loads.size());
      for (size_t d = 0; d < net_.loads.size(); ++d) lv[d] = u_.nominal[d];
      for (size_t k = 0; k < u_.uncertain.size(); ++k) lv[u_.uncertain[k]] = u_.lower[u_.uncertain[k]];
      for (size_t j = 0; j < active.size(); ++j)
        if ((mask >> j) & 1) lv[u_.uncertain[active[j]]] = u_.upper[u_.uncertain[active[j]]];
      bool dup = false;
      for (const auto& other : out)
        if (other == lv) {
          dup = true;
          break;
        }
      if (!dup) out.push_back(std::move(lv));
    }
    return out;
  }

private:
  const NetworkCase& net_;
  const robust::UncertaintySet& u_;
  form::FormulationOptions opt_;
};

}  // namespace rpop::test
