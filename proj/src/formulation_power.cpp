#include <cmath>

#include "rpop/formulation.hpp"

namespace rpop::form {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

Phase next_phase(Phase p) { return static_cast<Phase>((static_cast<int>(p) + 1) % 3); }
Phase prev_phase(Phase p) { return static_cast<Phase>((static_cast<int>(p) + 2) % 3); }

std::string edge_name(const NetworkCase& net, const Edge& e) {
  switch (e.kind) {
    case EdgeKind::Line: return net.lines[e.element].id;
    case EdgeKind::Switch: return net.switches[e.element].id;
    case EdgeKind::XfmrFrom: return net.transformers[e.element].id + ".fwd";
    case EdgeKind::XfmrTo: return net.transformers[e.element].id + ".rev";
  }
  return "?";
}

double edge_limit(const NetworkCase& net, const Edge& e, Phase ph) {
  int ip = static_cast<int>(ph);
  switch (e.kind) {
    case EdgeKind::Line: return net.lines[e.element].s_max[ip];
    case EdgeKind::Switch: return net.switches[e.element].s_max[ip];
    case EdgeKind::XfmrFrom:
    case EdgeKind::XfmrTo: return net.transformers[e.element].s_max[ip];
  }
  return 0.0;
}

/// Voltage-drop sensitivity of squared voltage to active flow: diagonal -2r,
/// off-diagonal r -+ sqrt(3) x depending on the cyclic phase order.
double mp_entry(const LineSegment& l, Phase a, Phase b) {
  int ia = static_cast<int>(a), ib = static_cast<int>(b);
  if (a == b) return -2.0 * l.r[ia][ia];
  if (b == next_phase(a)) return l.r[ia][ib] - kSqrt3 * l.x[ia][ib];
  return l.r[ia][ib] + kSqrt3 * l.x[ia][ib];
}

double mq_entry(const LineSegment& l, Phase a, Phase b) {
  int ia = static_cast<int>(a), ib = static_cast<int>(b);
  if (a == b) return -2.0 * l.x[ia][ia];
  if (b == next_phase(a)) return l.x[ia][ib] + kSqrt3 * l.r[ia][ib];
  return l.x[ia][ib] - kSqrt3 * l.r[ia][ib];
}

}  // namespace

void add_power_flow(Model& m, const NetworkCase& net, const LoadVector& loads,
                    const FormulationOptions& opt) {
  bool recourse = m.ctx == Context::Recourse;
  auto w_key = [](int bus, Phase ph) {
    return VarKey{VarKind::VoltageSq, bus, -1, static_cast<std::int8_t>(ph)};
  };
  auto fp_key = [](int edge, Phase ph) {
    return VarKey{VarKind::FlowP, edge, -1, static_cast<std::int8_t>(ph)};
  };
  auto fq_key = [](int edge, Phase ph) {
    return VarKey{VarKind::FlowQ, edge, -1, static_cast<std::int8_t>(ph)};
  };

  // Voltage boxes gated by block energization.
  for (size_t bus = 0; bus < net.buses.size(); ++bus) {
    const Bus& b = net.buses[bus];
    VarKey zbl{VarKind::BlockEnergized, net.block_of_bus[bus]};
    b.phases.for_each([&](Phase ph) {
      int w = m.vars.require(w_key(bus, ph));
      std::string base = "voltage_box[" + b.id + "," + std::string(1, phase_char(ph)) + "]";
      m.add_row({{w, 1.0}}, lp::Sense::LE, 0.0, {{zbl, b.v_max * b.v_max}}, base + ".ub", true);
      m.add_row({{w, 1.0}}, lp::Sense::GE, 0.0, {{zbl, b.v_min * b.v_min}}, base + ".lb", true);
    });
  }

  // Line voltage drops.
  for (size_t li = 0; li < net.lines.size(); ++li) {
    const LineSegment& line = net.lines[li];
    int edge = -1;
    for (size_t e = 0; e < net.edges.size(); ++e)
      if (net.edges[e].kind == EdgeKind::Line && net.edges[e].element == static_cast<int>(li))
        edge = static_cast<int>(e);
    line.phases.for_each([&](Phase ph) {
      std::vector<lp::Entry> lhs;
      lhs.push_back({m.vars.require(w_key(line.from_bus, ph)), 1.0});
      lhs.push_back({m.vars.require(w_key(line.to_bus, ph)), -1.0});
      line.phases.for_each([&](Phase ps) {
        double cp = mp_entry(line, ph, ps);
        double cq = mq_entry(line, ph, ps);
        if (cp != 0.0) lhs.push_back({m.vars.require(fp_key(edge, ps)), cp});
        if (cq != 0.0) lhs.push_back({m.vars.require(fq_key(edge, ps)), cq});
      });
      m.add_row(std::move(lhs), lp::Sense::EQ, 0.0, {},
                "voltage_drop[" + line.id + "," + std::string(1, phase_char(ph)) + "]");
    });
  }

  // Apparent-power polygons; switch rows are gated by the switch state.
  int K = opt.polygon_facets;
  double shrink = std::cos(M_PI / K);
  for (size_t e = 0; e < net.edges.size(); ++e) {
    const Edge& edge = net.edges[e];
    edge.phases.for_each([&](Phase ph) {
      double smax = edge_limit(net, edge, ph);
      for (int k = 0; k < K; ++k) {
        double ang = 2.0 * M_PI * k / K + M_PI / K;
        std::vector<lp::Entry> lhs{{m.vars.require(fp_key(e, ph)), std::cos(ang)},
                                   {m.vars.require(fq_key(e, ph)), std::sin(ang)}};
        std::string tag = (edge.kind == EdgeKind::Switch ? "switch_flow_polygon[" : "flow_polygon[") +
                          edge_name(net, edge) + "," + std::string(1, phase_char(ph)) + "," +
                          std::to_string(k) + "]";
        if (edge.kind == EdgeKind::Switch) {
          m.add_row(std::move(lhs), lp::Sense::LE, 0.0,
                    {{VarKey{VarKind::SwitchClosed, edge.element}, smax * shrink}}, tag, true);
        } else {
          m.add_row(std::move(lhs), lp::Sense::LE, smax * shrink, {}, tag, true);
        }
      }
    });
  }

  // Closed switches tie the squared voltages of their endpoints.
  for (size_t s = 0; s < net.switches.size(); ++s) {
    const Switch& sw = net.switches[s];
    VarKey zsw{VarKind::SwitchClosed, static_cast<int>(s)};
    sw.phases.for_each([&](Phase ph) {
      double big = std::max(net.buses[sw.from_bus].v_max, net.buses[sw.to_bus].v_max);
      big = big * big;
      int wi = m.vars.require(w_key(sw.from_bus, ph));
      int wj = m.vars.require(w_key(sw.to_bus, ph));
      std::string base = "switch_voltage_tie[" + sw.id + "," + std::string(1, phase_char(ph)) + "]";
      m.add_row({{wi, 1.0}, {wj, -1.0}}, lp::Sense::LE, big, {{zsw, -big}}, base + ".a", true);
      m.add_row({{wj, 1.0}, {wi, -1.0}}, lp::Sense::LE, big, {{zsw, -big}}, base + ".b", true);
    });
  }

  // Transformer relations.
  for (size_t t = 0; t < net.transformers.size(); ++t) {
    const Transformer& x = net.transformers[t];
    int fwd = -1, rev = -1;
    for (size_t e = 0; e < net.edges.size(); ++e) {
      if (net.edges[e].element != static_cast<int>(t)) continue;
      if (net.edges[e].kind == EdgeKind::XfmrFrom) fwd = static_cast<int>(e);
      if (net.edges[e].kind == EdgeKind::XfmrTo) rev = static_cast<int>(e);
    }
    double n2 = x.tap_ratio * x.tap_ratio;
    if (x.connection == XfmrConnection::Wye) {
      x.phases.for_each([&](Phase ph) {
        std::string p = std::string(1, phase_char(ph));
        m.add_row({{m.vars.require(w_key(x.from_bus, ph)), 1.0},
                   {m.vars.require(w_key(x.to_bus, ph)), -n2}},
                  lp::Sense::EQ, 0.0, {}, "xfmr_wye_voltage[" + x.id + "," + p + "]");
        // Lossless port coupling with flows measured out of each side.
        m.add_row({{m.vars.require(fp_key(fwd, ph)), 1.0}, {m.vars.require(fp_key(rev, ph)), 1.0}},
                  lp::Sense::EQ, 0.0, {}, "xfmr_wye_power_p[" + x.id + "," + p + "]");
        m.add_row({{m.vars.require(fq_key(fwd, ph)), 1.0}, {m.vars.require(fq_key(rev, ph)), 1.0}},
                  lp::Sense::EQ, 0.0, {}, "xfmr_wye_power_q[" + x.id + "," + p + "]");
      });
    } else {
      // Voltage pairs (a,b),(b,c),(c,a): 3(w_i^p + w_i^n) = 2 n^2 w_j^p.
      for (Phase ph : kAllPhases) {
        Phase ps = next_phase(ph);
        std::string p = std::string(1, phase_char(ph));
        m.add_row({{m.vars.require(w_key(x.from_bus, ph)), 3.0},
                   {m.vars.require(w_key(x.from_bus, ps)), 3.0},
                   {m.vars.require(w_key(x.to_bus, ph)), -2.0 * n2}},
                  lp::Sense::EQ, 0.0, {}, "xfmr_delta_voltage[" + x.id + "," + p + "]");
      }
      // Power pairs (a,c),(b,a),(c,b).
      for (Phase ph : kAllPhases) {
        Phase ps = prev_phase(ph);
        std::string p = std::string(1, phase_char(ph));
        m.add_row({{m.vars.require(fp_key(fwd, ph)), 2.0},
                   {m.vars.require(fp_key(rev, ph)), 1.0},
                   {m.vars.require(fp_key(rev, ps)), 1.0},
                   {m.vars.require(fq_key(rev, ps)), -1.0 / kSqrt3},
                   {m.vars.require(fq_key(rev, ph)), 1.0 / kSqrt3}},
                  lp::Sense::EQ, 0.0, {}, "xfmr_delta_p[" + x.id + "," + p + "]");
        m.add_row({{m.vars.require(fq_key(fwd, ph)), 2.0},
                   {m.vars.require(fp_key(rev, ph)), -1.0 / kSqrt3},
                   {m.vars.require(fp_key(rev, ps)), 1.0 / kSqrt3},
                   {m.vars.require(fq_key(rev, ps)), 1.0},
                   {m.vars.require(fq_key(rev, ph)), 1.0}},
                  lp::Sense::EQ, 0.0, {}, "xfmr_delta_q[" + x.id + "," + p + "]");
      }
    }
  }

  // Nodal balance. Flows out of the bus on the left; generation, gated load
  // and the shunt term on the right.
  for (size_t bus = 0; bus < net.buses.size(); ++bus) {
    const Bus& b = net.buses[bus];
    VarKey zbl{VarKind::BlockEnergized, net.block_of_bus[bus]};
    b.phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      for (int comp = 0; comp < 2; ++comp) {
        bool reactive = comp == 1;
        std::vector<lp::Entry> lhs;
        for (size_t e = 0; e < net.edges.size(); ++e) {
          const Edge& edge = net.edges[e];
          if (!edge.phases.contains(ph)) continue;
          auto key = reactive ? fq_key(e, ph) : fp_key(e, ph);
          if (edge.tail == static_cast<int>(bus)) lhs.push_back({m.vars.require(key), 1.0});
          // Transformer ports only touch their own tail bus.
          else if (edge.head == static_cast<int>(bus) &&
                   (edge.kind == EdgeKind::Line || edge.kind == EdgeKind::Switch))
            lhs.push_back({m.vars.require(key), -1.0});
        }
        double sh = reactive ? b.shunt[ip].b : b.shunt[ip].g;
        if (sh != 0.0) lhs.push_back({m.vars.require(w_key(bus, ph)), sh});

        std::vector<XTerm> xterms;
        double load_total = 0.0;
        bool has_load = false;
        for (int d : net.blocks[net.block_of_bus[bus]].loads) {
          const Load& ld = net.loads[d];
          if (ld.bus != static_cast<int>(bus) || !ld.phases.contains(ph)) continue;
          has_load = true;
          load_total += reactive ? loads[d][ip].q : loads[d][ip].p;
        }
        // Recourse models keep the gated load term even at zero so later load
        // re-realizations can rewrite it in place.
        if (load_total != 0.0 || (recourse && has_load)) xterms.push_back({zbl, -load_total});

        for (size_t g = 0; g < net.generators.size(); ++g) {
          const Generator& gen = net.generators[g];
          if (gen.bus != static_cast<int>(bus) || !gen.phases.contains(ph)) continue;
          VarKind pk = reactive ? VarKind::GenQ : VarKind::GenP;
          xterms.push_back({VarKey{pk, static_cast<int>(g), -1, static_cast<std::int8_t>(ip)}, 1.0});
          if (recourse) {
            VarKind up = reactive ? VarKind::AdjustUpQ : VarKind::AdjustUpP;
            VarKind dn = reactive ? VarKind::AdjustDownQ : VarKind::AdjustDownP;
            lhs.push_back({m.vars.require({up, static_cast<int>(g), -1,
                                           static_cast<std::int8_t>(ip)}), -1.0});
            lhs.push_back({m.vars.require({dn, static_cast<int>(g), -1,
                                           static_cast<std::int8_t>(ip)}), 1.0});
          }
        }
        if (recourse) {
          VarKind hu = reactive ? VarKind::SlackUpQ : VarKind::SlackUpP;
          VarKind hd = reactive ? VarKind::SlackDownQ : VarKind::SlackDownP;
          lhs.push_back({m.vars.require({hu, static_cast<int>(bus), -1,
                                         static_cast<std::int8_t>(ip)}), 1.0});
          lhs.push_back({m.vars.require({hd, static_cast<int>(bus), -1,
                                         static_cast<std::int8_t>(ip)}), -1.0});
        }
        int row = m.add_row(std::move(lhs), lp::Sense::EQ, 0.0, std::move(xterms),
                            std::string("power_balance[") + b.id + "," + phase_char(ph) +
                                (reactive ? ",q]" : ",p]"));
        m.balance_rows.push_back(
            {row, static_cast<int>(bus), static_cast<std::int8_t>(ip), reactive});
      }
    });
  }
}

}  // namespace rpop::form
