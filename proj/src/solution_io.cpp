#include "rpop/solution_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rpop::io {

using ordered_json = nlohmann::ordered_json;

SolutionFile make_solution_file(const NetworkCase& net, const robust::RpopSolution& sol,
                                std::optional<double> level, double epsilon) {
  SolutionFile sf;
  sf.case_name = net.name;
  sf.num_blocks = static_cast<int>(net.blocks.size());
  sf.num_switches = static_cast<int>(net.switches.size());
  sf.status = sol.status == robust::RpopStatus::Converged ? "converged" : "iteration_limit";
  sf.objective = sol.objective;
  sf.generation_cost = sol.x.gen_cost;
  sf.load_shed_cost = sol.x.shed_cost;
  sf.theta = sol.x.theta;
  sf.uncertainty_level = level;
  sf.epsilon = epsilon;
  sf.certificate_max_slack = sol.certificate_max_slack;
  sf.certificate_scenarios = sol.certificate_scenarios;

  for (const auto& b : net.blocks) {
    SolutionFile::BlockState bs;
    bs.id = b.id;
    bs.energized = sol.x.z_bl[b.id];
    for (int g : b.generators)
      if (sol.x.z_inv[g]) bs.grid_forming.push_back(net.generators[g].id);
    sf.blocks.push_back(std::move(bs));
  }
  for (size_t s = 0; s < net.switches.size(); ++s) {
    SolutionFile::SwitchState ss;
    ss.id = net.switches[s].id;
    ss.closed = sol.x.z_sw[s];
    ss.from_block = net.switch_blocks[s].first;
    ss.to_block = net.switch_blocks[s].second;
    sf.switches.push_back(std::move(ss));
  }
  for (size_t g = 0; g < net.generators.size(); ++g) {
    net.generators[g].phases.for_each([&](Phase ph) {
      int ip = static_cast<int>(ph);
      sf.setpoints.push_back({net.generators[g].id, phase_char(ph), sol.x.gen_setpoint[g][ip].p,
                              sol.x.gen_setpoint[g][ip].q});
    });
  }
  for (const auto& log : sol.logs)
    sf.iterations.push_back({log.k, log.master_objective, log.theta, log.worst_scenario, log.v2,
                             log.slack, log.scenario_solves});
  for (const auto& oc : sol.recourse) {
    SolutionFile::Recourse rc;
    rc.scenario = oc.id;
    rc.v2 = oc.v2;
    rc.slack = oc.slack;
    for (size_t g = 0; g < net.generators.size(); ++g) {
      net.generators[g].phases.for_each([&](Phase ph) {
        int ip = static_cast<int>(ph);
        rc.o_up.push_back(
            {net.generators[g].id, phase_char(ph), oc.o_up[g][ip].p, oc.o_up[g][ip].q});
        rc.o_dn.push_back(
            {net.generators[g].id, phase_char(ph), oc.o_dn[g][ip].p, oc.o_dn[g][ip].q});
      });
    }
    sf.recourse.push_back(std::move(rc));
  }
  return sf;
}

namespace {

ordered_json setpoints_json(const std::vector<SolutionFile::SetPoint>& sps) {
  ordered_json arr = ordered_json::array();
  for (const auto& sp : sps)
    arr.push_back({{"gen", sp.gen}, {"phase", std::string(1, sp.phase)}, {"p", sp.p}, {"q", sp.q}});
  return arr;
}

std::vector<SolutionFile::SetPoint> setpoints_from(const ordered_json& arr) {
  std::vector<SolutionFile::SetPoint> out;
  for (const auto& j : arr) {
    SolutionFile::SetPoint sp;
    sp.gen = j.at("gen").get<std::string>();
    sp.phase = j.at("phase").get<std::string>()[0];
    sp.p = j.at("p").get<double>();
    sp.q = j.at("q").get<double>();
    out.push_back(std::move(sp));
  }
  return out;
}

}  // namespace

std::string to_json_text(const SolutionFile& sf) {
  ordered_json j;
  j["case"] = sf.case_name;
  j["num_blocks"] = sf.num_blocks;
  j["num_switches"] = sf.num_switches;
  j["status"] = sf.status;
  j["objective"] = {{"total", sf.objective},
                    {"generation_cost", sf.generation_cost},
                    {"load_shed_cost", sf.load_shed_cost},
                    {"theta", sf.theta}};
  if (sf.uncertainty_level)
    j["uncertainty_level"] = *sf.uncertainty_level;
  else
    j["uncertainty_level"] = nullptr;
  j["epsilon"] = sf.epsilon;

  ordered_json blocks = ordered_json::array();
  for (const auto& b : sf.blocks)
    blocks.push_back({{"id", b.id}, {"energized", b.energized}, {"grid_forming", b.grid_forming}});
  j["blocks"] = blocks;

  ordered_json switches = ordered_json::array();
  for (const auto& s : sf.switches)
    switches.push_back(
        {{"id", s.id}, {"closed", s.closed}, {"from_block", s.from_block}, {"to_block", s.to_block}});
  j["switches"] = switches;

  j["der_setpoints"] = setpoints_json(sf.setpoints);

  ordered_json iters = ordered_json::array();
  for (const auto& it : sf.iterations)
    iters.push_back({{"k", it.k},
                     {"master_objective", it.master_objective},
                     {"theta", it.theta},
                     {"worst_scenario", it.worst_scenario},
                     {"v2", it.v2},
                     {"slack", it.slack},
                     {"scenario_solves", it.scenario_solves}});
  j["iterations"] = iters;

  j["certificate"] = {{"scenarios", sf.certificate_scenarios},
                      {"max_slack", sf.certificate_max_slack}};

  ordered_json rec = ordered_json::array();
  for (const auto& rc : sf.recourse)
    rec.push_back({{"scenario", rc.scenario},
                   {"v2", rc.v2},
                   {"slack", rc.slack},
                   {"o_up", setpoints_json(rc.o_up)},
                   {"o_dn", setpoints_json(rc.o_dn)}});
  j["recourse"] = rec;
  return j.dump(2) + "\n";
}

void write_solution(const std::string& path, const SolutionFile& sf) {
  std::ofstream out(path);
  if (!out)
    throw CaseError(CaseError::Kind::Parse, path, "", "cannot write solution file '" + path + "'");
  out << to_json_text(sf);
}

SolutionFile read_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw CaseError(CaseError::Kind::Parse, path, "", "cannot open solution file '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw CaseError(CaseError::Kind::Parse, path, "", path + ": " + e.what());
  }
  SolutionFile sf;
  try {
    sf.case_name = j.at("case").get<std::string>();
    sf.num_blocks = j.at("num_blocks").get<int>();
    sf.num_switches = j.at("num_switches").get<int>();
    sf.status = j.at("status").get<std::string>();
    sf.objective = j.at("objective").at("total").get<double>();
    sf.generation_cost = j.at("objective").at("generation_cost").get<double>();
    sf.load_shed_cost = j.at("objective").at("load_shed_cost").get<double>();
    sf.theta = j.at("objective").at("theta").get<double>();
    if (!j.at("uncertainty_level").is_null())
      sf.uncertainty_level = j.at("uncertainty_level").get<double>();
    sf.epsilon = j.at("epsilon").get<double>();
    for (const auto& b : j.at("blocks")) {
      SolutionFile::BlockState bs;
      bs.id = b.at("id").get<int>();
      bs.energized = b.at("energized").get<bool>();
      for (const auto& g : b.at("grid_forming")) bs.grid_forming.push_back(g.get<std::string>());
      sf.blocks.push_back(std::move(bs));
    }
    for (const auto& s : j.at("switches")) {
      SolutionFile::SwitchState ss;
      ss.id = s.at("id").get<std::string>();
      ss.closed = s.at("closed").get<bool>();
      ss.from_block = s.at("from_block").get<int>();
      ss.to_block = s.at("to_block").get<int>();
      sf.switches.push_back(std::move(ss));
    }
    sf.setpoints = setpoints_from(j.at("der_setpoints"));
    for (const auto& it : j.at("iterations"))
      sf.iterations.push_back({it.at("k").get<int>(), it.at("master_objective").get<double>(),
                               it.at("theta").get<double>(), it.at("worst_scenario").get<int>(),
                               it.at("v2").get<double>(), it.at("slack").get<double>(),
                               it.at("scenario_solves").get<int>()});
    sf.certificate_scenarios = j.at("certificate").at("scenarios").get<int>();
    sf.certificate_max_slack = j.at("certificate").at("max_slack").get<double>();
    for (const auto& rc : j.at("recourse")) {
      SolutionFile::Recourse r;
      r.scenario = rc.at("scenario").get<int>();
      r.v2 = rc.at("v2").get<double>();
      r.slack = rc.at("slack").get<double>();
      r.o_up = setpoints_from(rc.at("o_up"));
      r.o_dn = setpoints_from(rc.at("o_dn"));
      sf.recourse.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CaseError(CaseError::Kind::Schema, path, "", path + ": " + e.what());
  }
  return sf;
}

form::MasterSolution to_master_solution(const SolutionFile& sf, const NetworkCase& net) {
  if (sf.case_name != net.name || sf.num_blocks != static_cast<int>(net.blocks.size()) ||
      sf.num_switches != static_cast<int>(net.switches.size()))
    throw CaseError(CaseError::Kind::Invariant, sf.case_name, "case",
                    "solution file does not match case '" + net.name + "'");
  form::MasterSolution x;
  x.z_sw.assign(net.switches.size(), 0);
  x.z_bl.assign(net.blocks.size(), 0);
  x.z_inv.assign(net.generators.size(), 0);
  x.gen_setpoint.assign(net.generators.size(), {});
  for (const auto& s : sf.switches) {
    int idx = net.switch_index(s.id);
    if (idx < 0)
      throw CaseError(CaseError::Kind::Invariant, s.id, "switch",
                      "solution switch '" + s.id + "' not in case");
    x.z_sw[idx] = s.closed;
  }
  for (const auto& b : sf.blocks) {
    if (b.id < 0 || b.id >= static_cast<int>(net.blocks.size()))
      throw CaseError(CaseError::Kind::Invariant, std::to_string(b.id), "block",
                      "solution block id out of range");
    x.z_bl[b.id] = b.energized;
    for (const auto& gid : b.grid_forming) {
      for (size_t g = 0; g < net.generators.size(); ++g)
        if (net.generators[g].id == gid) x.z_inv[g] = 1;
    }
  }
  for (const auto& sp : sf.setpoints) {
    for (size_t g = 0; g < net.generators.size(); ++g) {
      if (net.generators[g].id != sp.gen) continue;
      int ip = sp.phase - 'a';
      x.gen_setpoint[g][ip] = {sp.p, sp.q};
    }
  }
  x.theta = sf.theta;
  x.objective = sf.objective;
  x.gen_cost = sf.generation_cost;
  x.shed_cost = sf.load_shed_cost;
  return x;
}

std::string to_dot(const SolutionFile& sf) {
  std::ostringstream os;
  os << "graph \"" << sf.case_name << "\" {\n";
  os << "  layout=neato;\n  overlap=false;\n";
  for (const auto& b : sf.blocks) {
    os << "  b" << b.id << " [label=\"block " << b.id;
    for (const auto& g : b.grid_forming) os << "\\nGF: " << g;
    os << "\" shape=circle style=filled fillcolor=\""
       << (b.energized ? "palegreen" : "lightcoral") << "\" energized=\""
       << (b.energized ? "true" : "false") << "\"];\n";
  }
  for (const auto& s : sf.switches) {
    os << "  b" << s.from_block << " -- b" << s.to_block << " [label=\"" << s.id << "\" style=\""
       << (s.closed ? "solid" : "dashed") << "\" closed=\"" << (s.closed ? "true" : "false")
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace rpop::io
