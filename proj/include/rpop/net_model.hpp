#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "rpop/phase.hpp"

namespace rpop {

struct Bus {
  std::string id;
  PhaseSet phases;
  double v_min = 0.9;
  double v_max = 1.1;
  std::array<Shunt, 3> shunt{};  // per phase, meaningful only on `phases`
};

struct LineSegment {
  std::string id;
  int from_bus = -1;
  int to_bus = -1;
  PhaseSet phases;
  // Self and mutual impedance entries, indexed by phase pair; only entries
  // with both phases present are meaningful.
  std::array<std::array<double, 3>, 3> r{};
  std::array<std::array<double, 3>, 3> x{};
  std::array<double, 3> s_max{};
};

struct Switch {
  std::string id;
  int from_bus = -1;
  int to_bus = -1;
  PhaseSet phases;
  std::array<double, 3> s_max{};
  bool normally_closed = false;
};

enum class XfmrConnection { Wye, Delta };

struct Transformer {
  std::string id;
  int from_bus = -1;
  int to_bus = -1;
  XfmrConnection connection = XfmrConnection::Wye;
  double tap_ratio = 1.0;
  PhaseSet phases;
  std::array<double, 3> s_max{};
};

struct Load {
  std::string id;
  int bus = -1;
  PhaseSet phases;
  std::array<PQ, 3> s_nominal{};
  std::array<PQ, 3> s_lower{};
  std::array<PQ, 3> s_upper{};
  bool uncertain = false;
};

struct Generator {
  std::string id;
  int bus = -1;
  PhaseSet phases;
  std::array<PQ, 3> s_min{};
  std::array<PQ, 3> s_max{};
  double c1 = 0.0;            // $/pu on delivered active power
  double c0 = 0.0;            // $ fixed, paid when the block is energized
  double ramp_fraction = 0.3; // recourse headroom as a fraction of capacity
};

/// Connected component of the network with every switch open; the atomic
/// unit of energization.
struct Block {
  int id = -1;
  std::vector<int> buses;
  std::vector<int> loads;
  std::vector<int> generators;
  double weight = 0.0;  // shed penalty (dollars)
};

/// Unified directed edge view used by the physics builders. Lines and
/// switches carry one flow bundle measured out of `tail`; transformers carry
/// one bundle per port.
enum class EdgeKind : std::uint8_t { Line, Switch, XfmrFrom, XfmrTo };

struct Edge {
  EdgeKind kind;
  int element;  // index into lines / switches / transformers
  int tail;
  int head;
  PhaseSet phases;
};

struct NetworkCase {
  std::string name;
  double base_kva = 1000.0;
  double base_kv = 4.16;

  std::vector<Bus> buses;
  std::vector<LineSegment> lines;
  std::vector<Switch> switches;
  std::vector<Transformer> transformers;
  std::vector<Load> loads;
  std::vector<Generator> generators;

  // Derived by finalize().
  std::vector<Block> blocks;
  std::vector<int> block_of_bus;
  std::vector<std::pair<int, int>> switch_blocks;  // per switch: (block(from), block(to))
  std::vector<Edge> edges;
  std::vector<std::string> warnings;

  int bus_index(const std::string& id) const;
  int switch_index(const std::string& id) const;

  /// Validates every type invariant and derives blocks, the block graph and
  /// the edge list. Throws CaseError naming the offending element.
  void finalize(double alpha_base = 10.0, double alpha_per_load = 0.01);

  /// Recomputes block shed weights for a different weighting config.
  void compute_weights(double alpha_base, double alpha_per_load);
};

/// Connected components of the bus graph with all switch edges removed,
/// ordered by smallest contained bus id.
std::vector<Block> compute_blocks(const NetworkCase& c);

/// Partition of the blocks induced by the given closed switches; components
/// ordered by smallest contained block id. Throws on unknown switch ids.
std::vector<std::vector<int>> connected_components(const NetworkCase& c,
                                                   const std::set<std::string>& closed_switches);

/// Same partition computed from a per-switch closed flag vector.
std::vector<std::vector<int>> connected_components(const NetworkCase& c,
                                                   const std::vector<char>& closed);

/// Loads, validates and finalizes a case file (JSON, see docs/case-schema.md).
NetworkCase load_case(const std::string& path);

/// Parses a case from JSON text (used by load_case and tests).
NetworkCase parse_case(const std::string& json_text, const std::string& origin);

}  // namespace rpop
