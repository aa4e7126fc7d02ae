#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rpop/net_model.hpp"

namespace rpop {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& element, const std::string& field,
                               const std::string& msg) {
  throw CaseError(CaseError::Kind::Schema, element, field, element + "." + field + ": " + msg);
}

double require_number(const json& j, const std::string& element, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    schema_error(element, field, "expected a number");
  return j[field].get<double>();
}

std::string require_string(const json& j, const std::string& element, const std::string& field) {
  if (!j.contains(field) || !j[field].is_string())
    schema_error(element, field, "expected a string");
  return j[field].get<std::string>();
}

PQ parse_pq(const json& j, const std::string& element, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    schema_error(element, field, "expected [p, q]");
  return {j[0].get<double>(), j[1].get<double>()};
}

/// Per-phase complex values: {"a": [p,q], ...} restricted to `phases`.
std::array<PQ, 3> parse_phase_pq(const json& j, PhaseSet phases, const std::string& element,
                                 const std::string& field) {
  std::array<PQ, 3> out{};
  if (!j.is_object()) schema_error(element, field, "expected per-phase map");
  for (auto it = j.begin(); it != j.end(); ++it) {
    PhaseSet p = PhaseSet::parse(it.key(), element);
    if (p.count() != 1 || !p.subset_of(phases))
      schema_error(element, field, "phase key '" + it.key() + "' not in device phases");
    for (Phase ph : kAllPhases)
      if (p.contains(ph)) out[static_cast<int>(ph)] = parse_pq(it.value(), element, field);
  }
  return out;
}

/// Per-phase limits: either one scalar for all phases or {"a": v, ...}.
std::array<double, 3> parse_phase_limit(const json& j, PhaseSet phases, const std::string& element,
                                        const std::string& field) {
  std::array<double, 3> out{};
  if (j.is_number()) {
    phases.for_each([&](Phase p) { out[static_cast<int>(p)] = j.get<double>(); });
    return out;
  }
  if (!j.is_object()) schema_error(element, field, "expected a number or per-phase map");
  for (auto it = j.begin(); it != j.end(); ++it) {
    PhaseSet p = PhaseSet::parse(it.key(), element);
    if (p.count() != 1 || !p.subset_of(phases))
      schema_error(element, field, "phase key '" + it.key() + "' not in device phases");
    if (!it.value().is_number()) schema_error(element, field, "expected a number");
    for (Phase ph : kAllPhases)
      if (p.contains(ph)) out[static_cast<int>(ph)] = it.value().get<double>();
  }
  return out;
}

/// Impedance matrix over the declared phase order: nested rows or a flat
/// row-major array of length n*n.
std::array<std::array<double, 3>, 3> parse_matrix(const json& j, PhaseSet phases,
                                                  const std::string& element,
                                                  const std::string& field) {
  std::array<std::array<double, 3>, 3> out{};
  int n = phases.count();
  std::vector<double> flat;
  if (!j.is_array()) schema_error(element, field, "expected a matrix");
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != n) schema_error(element, field, "wrong matrix dimension");
    for (const auto& row : j) {
      if (static_cast<int>(row.size()) != n) schema_error(element, field, "ragged matrix");
      for (const auto& v : row) {
        if (!v.is_number()) schema_error(element, field, "expected numeric entries");
        flat.push_back(v.get<double>());
      }
    }
  } else {
    if (static_cast<int>(j.size()) != n * n)
      schema_error(element, field, "expected " + std::to_string(n * n) + " row-major entries");
    for (const auto& v : j) {
      if (!v.is_number()) schema_error(element, field, "expected numeric entries");
      flat.push_back(v.get<double>());
    }
  }
  std::vector<int> phase_idx;
  phases.for_each([&](Phase p) { phase_idx.push_back(static_cast<int>(p)); });
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out[phase_idx[a]][phase_idx[b]] = flat[a * n + b];
  return out;
}

int lookup_bus(const NetworkCase& c, const json& j, const std::string& element,
               const std::string& field) {
  std::string id = require_string(j, element, field);
  int idx = c.bus_index(id);
  if (idx < 0) schema_error(element, field, "unknown bus '" + id + "'");
  return idx;
}

}  // namespace

NetworkCase parse_case(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CaseError(CaseError::Kind::Parse, origin, "", origin + ": " + e.what());
  }
  if (!root.is_object()) throw CaseError(CaseError::Kind::Parse, origin, "", "expected an object");

  NetworkCase c;
  c.name = root.value("name", origin);
  if (root.contains("bases")) {
    const auto& b = root["bases"];
    c.base_kva = b.value("power_kva", 1000.0);
    c.base_kv = b.value("voltage_kv", 4.16);
  }

  for (const auto& j : root.value("buses", json::array())) {
    Bus b;
    b.id = require_string(j, "bus", "id");
    b.phases = PhaseSet::parse(require_string(j, b.id, "phases"), b.id);
    b.v_min = require_number(j, b.id, "v_min");
    b.v_max = require_number(j, b.id, "v_max");
    if (j.contains("shunt")) {
      auto sh = parse_phase_pq(j["shunt"], b.phases, b.id, "shunt");
      for (int p = 0; p < 3; ++p) b.shunt[p] = {sh[p].p, sh[p].q};
    }
    c.buses.push_back(std::move(b));
  }

  for (const auto& j : root.value("lines", json::array())) {
    LineSegment l;
    l.id = require_string(j, "line", "id");
    l.phases = PhaseSet::parse(require_string(j, l.id, "phases"), l.id);
    l.from_bus = lookup_bus(c, j, l.id, "from");
    l.to_bus = lookup_bus(c, j, l.id, "to");
    if (!j.contains("r") || !j.contains("x")) schema_error(l.id, "r", "missing impedance");
    l.r = parse_matrix(j["r"], l.phases, l.id, "r");
    l.x = parse_matrix(j["x"], l.phases, l.id, "x");
    if (!j.contains("s_max")) schema_error(l.id, "s_max", "missing limit");
    l.s_max = parse_phase_limit(j["s_max"], l.phases, l.id, "s_max");
    c.lines.push_back(std::move(l));
  }

  for (const auto& j : root.value("switches", json::array())) {
    Switch s;
    s.id = require_string(j, "switch", "id");
    s.phases = PhaseSet::parse(require_string(j, s.id, "phases"), s.id);
    s.from_bus = lookup_bus(c, j, s.id, "from");
    s.to_bus = lookup_bus(c, j, s.id, "to");
    if (!j.contains("s_max")) schema_error(s.id, "s_max", "missing limit");
    s.s_max = parse_phase_limit(j["s_max"], s.phases, s.id, "s_max");
    s.normally_closed = j.value("normally_closed", false);
    c.switches.push_back(std::move(s));
  }

  for (const auto& j : root.value("transformers", json::array())) {
    Transformer t;
    t.id = require_string(j, "transformer", "id");
    t.phases = PhaseSet::parse(require_string(j, t.id, "phases"), t.id);
    t.from_bus = lookup_bus(c, j, t.id, "from");
    t.to_bus = lookup_bus(c, j, t.id, "to");
    std::string conn = require_string(j, t.id, "connection");
    if (conn == "wye")
      t.connection = XfmrConnection::Wye;
    else if (conn == "delta")
      t.connection = XfmrConnection::Delta;
    else
      schema_error(t.id, "connection", "expected 'wye' or 'delta'");
    t.tap_ratio = require_number(j, t.id, "tap_ratio");
    if (!j.contains("s_max")) schema_error(t.id, "s_max", "missing limit");
    t.s_max = parse_phase_limit(j["s_max"], t.phases, t.id, "s_max");
    c.transformers.push_back(std::move(t));
  }

  for (const auto& j : root.value("loads", json::array())) {
    Load d;
    d.id = require_string(j, "load", "id");
    d.phases = PhaseSet::parse(require_string(j, d.id, "phases"), d.id);
    d.bus = lookup_bus(c, j, d.id, "bus");
    if (!j.contains("s_nominal")) schema_error(d.id, "s_nominal", "missing");
    d.s_nominal = parse_phase_pq(j["s_nominal"], d.phases, d.id, "s_nominal");
    d.uncertain = j.value("uncertain", false);
    d.s_lower = j.contains("s_lower") ? parse_phase_pq(j["s_lower"], d.phases, d.id, "s_lower")
                                      : d.s_nominal;
    d.s_upper = j.contains("s_upper") ? parse_phase_pq(j["s_upper"], d.phases, d.id, "s_upper")
                                      : d.s_nominal;
    c.loads.push_back(std::move(d));
  }

  for (const auto& j : root.value("generators", json::array())) {
    Generator g;
    g.id = require_string(j, "generator", "id");
    g.phases = PhaseSet::parse(require_string(j, g.id, "phases"), g.id);
    g.bus = lookup_bus(c, j, g.id, "bus");
    if (!j.contains("s_min") || !j.contains("s_max")) schema_error(g.id, "s_min", "missing bounds");
    g.s_min = parse_phase_pq(j["s_min"], g.phases, g.id, "s_min");
    g.s_max = parse_phase_pq(j["s_max"], g.phases, g.id, "s_max");
    g.c1 = require_number(j, g.id, "c1");
    g.c0 = j.value("c0", 0.0);
    g.ramp_fraction = j.value("ramp_fraction", 0.3);
    c.generators.push_back(std::move(g));
  }

  c.finalize();
  return c;
}

NetworkCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw CaseError(CaseError::Kind::Parse, path, "", "cannot open case file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str(), path);
}

}  // namespace rpop
