#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rpop/lp.hpp"
#include "rpop/milp.hpp"
#include "rpop/net_model.hpp"

namespace rpop::form {

enum class Context { Master, Recourse };

/// Semantic identity of every model variable. `a`/`b` index case elements
/// (switch, block, generator, bus or edge depending on the kind).
enum class VarKind : std::uint8_t {
  SwitchClosed,    // a = switch
  BlockEnergized,  // a = block
  GridForming,     // a = generator
  SwitchColor,     // a = switch, b = coloring block
  CommodityFlow,   // a = switch, b = commodity block
  VirtualFlow,     // a = source block, b = sink block
  GenP,            // a = generator, phase
  GenQ,
  VoltageSq,       // a = bus, phase
  FlowP,           // a = edge, phase
  FlowQ,
  Theta,
  AdjustUpP,       // a = generator, phase
  AdjustUpQ,
  AdjustDownP,
  AdjustDownQ,
  SlackUpP,        // a = bus, phase
  SlackUpQ,
  SlackDownP,
  SlackDownQ,
};

struct VarKey {
  VarKind kind{};
  int a = -1;
  int b = -1;
  std::int8_t phase = -1;

  bool operator<(const VarKey& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (a != o.a) return a < o.a;
    if (b != o.b) return b < o.b;
    return phase < o.phase;
  }
  bool operator==(const VarKey&) const = default;
};

std::string key_name(const VarKey& k, const NetworkCase& net);

/// One affine right-hand-side term coeff * x[key] of a row, where x is the
/// first-stage vector. Realized as a left-hand-side entry in master models
/// and as a constant plus recorded sensitivity in recourse models.
struct XTerm {
  VarKey key;
  double coeff = 0.0;
};

struct FormulationOptions {
  int k_der = 1;
  int polygon_facets = 8;
  double omega = 705.0;
  bool master_nominal_pf = true;
  /// When nonnegative, replaces every generator's ramp_fraction; used by the
  /// sampling studies to model a fixed dispatch window around the set-points.
  double ramp_override = -1.0;
};

/// First-stage decisions: switch states, block states, grid-forming flags and
/// generator set-points.
struct MasterSolution {
  std::vector<char> z_sw;
  std::vector<char> z_bl;
  std::vector<char> z_inv;
  std::vector<std::array<PQ, 3>> gen_setpoint;
  double theta = 0.0;
  double objective = 0.0;
  double shed_cost = 0.0;
  double gen_cost = 0.0;

  double xval(const VarKey& k) const;
};

/// One sub-gradient cut theta >= v2 + gradient' (x - x_star).
struct CutRecord {
  double v2 = 0.0;
  int scenario_id = -1;
  std::vector<XTerm> gradient;
  std::vector<std::pair<VarKey, double>> x_star;
  /// Duals of the x-coupled rows, kept for auditing.
  std::vector<std::pair<std::string, double>> coupled_duals;

  double value_at(const MasterSolution& x) const;
};

/// Realized load values, one complex power per load and phase.
using LoadVector = std::vector<std::array<PQ, 3>>;

LoadVector nominal_loads(const NetworkCase& net);

class VariableIndexer {
public:
  int add(lp::LinearProgram& lp, const VarKey& key, double lo, double hi, double cost,
          std::string tag);
  int get(const VarKey& key) const;
  int require(const VarKey& key) const;
  const std::vector<VarKey>& keys() const { return keys_; }

private:
  std::map<VarKey, int> index_;
  std::vector<VarKey> keys_;
};

struct BalanceRowRef {
  int row = -1;
  int bus = -1;
  std::int8_t phase = -1;
  bool reactive = false;
};

/// Shared assembly state for one optimization model.
struct Model {
  explicit Model(Context c) : ctx(c) {}

  Context ctx;
  lp::LinearProgram lp;
  VariableIndexer vars;
  const MasterSolution* x_star = nullptr;    // recourse only
  std::vector<std::vector<XTerm>> row_x;     // per row, rhs sensitivities (recourse)
  std::vector<BalanceRowRef> balance_rows;

  /// Adds a row whose rhs is rhs0 + sum(xterms); master models receive the
  /// x terms as negated lhs entries, recourse models substitute x_star.
  int add_row(std::vector<lp::Entry> lhs, lp::Sense sense, double rhs0, std::vector<XTerm> xterms,
              std::string tag, bool lazy = false);

  double x_value(const VarKey& k) const;
};

/// Rows whose feasible switch assignments are exactly the acyclic (forest)
/// subgraphs of the block graph; one row per simple cycle.
void add_radiality(Model& m, const NetworkCase& net);

/// Grid-forming assignment, energization coupling and the commodity-flow
/// coloring scheme, including generator capacity gating.
void add_coloring(Model& m, const NetworkCase& net, const FormulationOptions& opt);

/// Voltage boxes, branch voltage drops, polygonal apparent-power limits,
/// transformer relations and nodal power balance. Recourse models receive
/// balance slacks and generator adjustments.
void add_power_flow(Model& m, const NetworkCase& net, const LoadVector& loads,
                    const FormulationOptions& opt);

struct MasterModel {
  Model model{Context::Master};
  milp::MixedIntegerProgram mip;  // mip.lp mirrors model.lp
  double objective_constant = 0.0;
  /// All-blocks-shed assignment, always feasible; used to seed the search.
  std::vector<double> shed_everything;
};

MasterModel build_master(const NetworkCase& net, const std::vector<CutRecord>& cuts,
                         const FormulationOptions& opt);

MasterSolution extract_master_solution(const NetworkCase& net, const MasterModel& mm,
                                       const milp::MipSolution& sol);

struct RecourseModel {
  Model model{Context::Recourse};
  MasterSolution x_star;
};

RecourseModel build_subproblem(const NetworkCase& net, const MasterSolution& x_star,
                               const LoadVector& loads, const FormulationOptions& opt);

/// Rewrites the load-dependent parts of the balance rows in place, so one
/// model can be re-solved across load realizations (warm starts stay valid).
void set_subproblem_loads(RecourseModel& rm, const NetworkCase& net, const LoadVector& loads);

/// Total power-balance violation of a recourse solution.
double total_slack(const RecourseModel& rm, const lp::LpSolution& sol);

/// Recourse adjustment cost (the objective minus the slack penalty).
double adjustment_cost(const RecourseModel& rm, const lp::LpSolution& sol,
                       const FormulationOptions& opt);

CutRecord extract_cut(const RecourseModel& rm, const lp::LpSolution& sol,
                      const MasterSolution& x_star);

}  // namespace rpop::form
