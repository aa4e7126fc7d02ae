#include "rpop/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "rpop/common.hpp"

namespace rpop {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw CaseError(CaseError::Kind::Parse, "config", key, "config: bad number for " + key);
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw CaseError(CaseError::Kind::Parse, "config", key, "config: bad integer for " + key);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw CaseError(CaseError::Kind::Parse, "config", key, "config: bad boolean for " + key);
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty())
    throw CaseError(CaseError::Kind::Parse, "config", key, "config: empty list for " + key);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0))
      throw CaseError(CaseError::Kind::Invariant, "config", name,
                      std::string("config: ") + name + " must be positive");
  };
  positive(epsilon, "epsilon");
  positive(omega, "omega");
  positive(alpha_base, "alpha_base");
  if (alpha_per_load < 0)
    throw CaseError(CaseError::Kind::Invariant, "config", "alpha_per_load",
                    "config: alpha_per_load must be nonnegative");
  if (k_der < 1)
    throw CaseError(CaseError::Kind::Invariant, "config", "k_der", "config: k_der must be >= 1");
  if (ramp_fraction && !(*ramp_fraction > 0 && *ramp_fraction <= 1))
    throw CaseError(CaseError::Kind::Invariant, "config", "ramp_fraction",
                    "config: ramp_fraction must lie in (0, 1]");
  if (polygon_facets < 4)
    throw CaseError(CaseError::Kind::Invariant, "config", "polygon_facets",
                    "config: polygon_facets must be >= 4");
  if (max_iterations < 1)
    throw CaseError(CaseError::Kind::Invariant, "config", "max_iterations",
                    "config: max_iterations must be >= 1");
  if (scenario_cap < 0)
    throw CaseError(CaseError::Kind::Invariant, "config", "scenario_cap",
                    "config: scenario_cap must be nonnegative");
  positive(der_window, "der_window");
  positive(sample_epsilon, "sample_epsilon");
  if (n_samples < 1)
    throw CaseError(CaseError::Kind::Invariant, "config", "n_samples",
                    "config: n_samples must be >= 1");
  for (double l : uncertainty_levels)
    if (l < 0)
      throw CaseError(CaseError::Kind::Invariant, "config", "uncertainty_levels",
                      "config: levels must be nonnegative");
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "epsilon") epsilon = parse_double(key, value);
  else if (key == "omega") omega = parse_double(key, value);
  else if (key == "alpha_base") alpha_base = parse_double(key, value);
  else if (key == "alpha_per_load") alpha_per_load = parse_double(key, value);
  else if (key == "k_der") k_der = static_cast<int>(parse_int(key, value));
  else if (key == "ramp_fraction") ramp_fraction = parse_double(key, value);
  else if (key == "polygon_facets") polygon_facets = static_cast<int>(parse_int(key, value));
  else if (key == "max_iterations") max_iterations = static_cast<int>(parse_int(key, value));
  else if (key == "master_nominal_pf") master_nominal_pf = parse_bool(key, value);
  else if (key == "scenario_cap") scenario_cap = static_cast<int>(parse_int(key, value));
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "uncertainty_levels") uncertainty_levels = parse_list(key, value);
  else if (key == "opt_gap_rel") opt_gap_rel = parse_double(key, value);
  else if (key == "threads") threads = static_cast<int>(parse_int(key, value));
  else if (key == "fix_topology") fix_topology = parse_bool(key, value);
  else if (key == "n_samples") n_samples = static_cast<int>(parse_int(key, value));
  else if (key == "der_window") der_window = parse_double(key, value);
  else if (key == "sample_epsilon") sample_epsilon = parse_double(key, value);
  else
    throw CaseError(CaseError::Kind::Parse, "config", key, "config: unknown key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw CaseError(CaseError::Kind::Parse, path, "", "cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CaseError(CaseError::Kind::Parse, path, "line " + std::to_string(lineno),
                      path + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

void RunConfig::print(std::ostream& os) const {
  os << "epsilon = " << epsilon << "\n";
  os << "omega = " << omega << "\n";
  os << "alpha_base = " << alpha_base << "\n";
  os << "alpha_per_load = " << alpha_per_load << "\n";
  os << "k_der = " << k_der << "\n";
  if (ramp_fraction)
    os << "ramp_fraction = " << *ramp_fraction << "\n";
  else
    os << "# ramp_fraction unset: per-generator case values apply\n";
  os << "polygon_facets = " << polygon_facets << "\n";
  os << "max_iterations = " << max_iterations << "\n";
  os << "master_nominal_pf = " << (master_nominal_pf ? "true" : "false") << "\n";
  os << "scenario_cap = " << scenario_cap << "\n";
  os << "seed = " << seed << "\n";
  os << "uncertainty_levels = ";
  for (size_t i = 0; i < uncertainty_levels.size(); ++i)
    os << (i ? ", " : "") << uncertainty_levels[i];
  os << "\n";
  os << "opt_gap_rel = " << opt_gap_rel << "\n";
  os << "threads = " << threads << "\n";
  os << "fix_topology = " << (fix_topology ? "true" : "false") << "\n";
  os << "n_samples = " << n_samples << "\n";
  os << "der_window = " << der_window << "\n";
  os << "sample_epsilon = " << sample_epsilon << "\n";
}

form::FormulationOptions RunConfig::formulation() const {
  form::FormulationOptions f;
  f.k_der = k_der;
  f.polygon_facets = polygon_facets;
  f.omega = omega;
  f.master_nominal_pf = master_nominal_pf;
  f.ramp_override = ramp_fraction.value_or(-1.0);
  return f;
}

robust::RobustConfig RunConfig::robust(std::ostream* log) const {
  robust::RobustConfig r;
  r.epsilon = epsilon;
  r.opt_gap_rel = opt_gap_rel;
  r.max_iterations = max_iterations;
  r.scenario_cap = scenario_cap;
  r.threads = threads;
  r.fix_topology = fix_topology;
  r.form = formulation();
  r.log = log;
  return r;
}

}  // namespace rpop
