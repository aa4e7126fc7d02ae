// Command-line front end: validate cases, run the robust partitioning solve,
// query worst-case scenarios, run out-of-sample feasibility studies, and
// export solutions.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "rpop/config.hpp"
#include "rpop/feasibility.hpp"
#include "rpop/solution_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNonconverged = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitInternal = 4;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool verbose = false;
  std::string dump_dir;
  bool print_config = false;
};

rpop::RunConfig effective_config(const GlobalArgs& g) {
  rpop::RunConfig cfg;
  if (!g.config_path.empty()) cfg = rpop::RunConfig::from_file(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

rpop::NetworkCase load_and_reweight(const std::string& path, const rpop::RunConfig& cfg) {
  auto net = rpop::load_case(path);
  net.compute_weights(cfg.alpha_base, cfg.alpha_per_load);
  return net;
}

int cmd_validate(const GlobalArgs& g, const std::string& case_path) {
  auto cfg = effective_config(g);
  auto net = load_and_reweight(case_path, cfg);
  int uncertain = 0;
  for (const auto& d : net.loads) uncertain += d.uncertain ? 1 : 0;
  std::cout << net.name << ": " << net.buses.size() << " buses, " << net.blocks.size()
            << " blocks, " << net.switches.size() << " switches, " << net.generators.size()
            << " DERs, " << net.loads.size() << " loads (" << uncertain << " uncertain)\n";
  std::cout << "block graph:";
  for (size_t s = 0; s < net.switches.size(); ++s)
    std::cout << " " << net.switches[s].id << "(" << net.switch_blocks[s].first << "-"
              << net.switch_blocks[s].second << ")";
  std::cout << "\n";
  for (const auto& w : net.warnings) std::cout << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_solve(const GlobalArgs& g, const std::string& case_path, const std::string& out_path,
              std::optional<double> level_flag, bool file_bounds, bool fix_topology) {
  auto cfg = effective_config(g);
  if (fix_topology) cfg.fix_topology = true;
  auto net = load_and_reweight(case_path, cfg);

  std::optional<double> level;
  if (file_bounds)
    level = std::nullopt;
  else if (level_flag)
    level = *level_flag;
  else
    level = cfg.uncertainty_levels.empty() ? std::optional<double>{} : cfg.uncertainty_levels[0];

  auto u = rpop::robust::UncertaintySet::from_case(net, level);
  auto rcfg = cfg.robust(&std::cout);
  if (!g.dump_dir.empty()) {
    std::filesystem::create_directories(g.dump_dir);
    rcfg.dump_dir = g.dump_dir;
  }
  if (g.verbose) rcfg.milp_log = &std::cerr;

  auto sol = rpop::robust::solve_rpop(net, u, rcfg);
  auto sf = rpop::io::make_solution_file(net, sol, level, cfg.epsilon);
  if (!out_path.empty()) rpop::io::write_solution(out_path, sf);

  int energized = 0, closed = 0;
  for (char z : sol.x.z_bl) energized += z;
  for (char z : sol.x.z_sw) closed += z;
  std::cout << "status " << sf.status << "\n";
  std::cout << "objective " << sol.objective << " (generation " << sol.x.gen_cost << ", shed "
            << sol.x.shed_cost << ", theta " << sol.x.theta << ")\n";
  std::cout << "energized_blocks " << energized << "/" << net.blocks.size() << " closed_switches "
            << closed << "/" << net.switches.size() << "\n";
  std::cout << "certificate scenarios " << sol.certificate_scenarios << " max_slack "
            << sol.certificate_max_slack << "\n";
  return sol.status == rpop::robust::RpopStatus::Converged ? kExitOk : kExitNonconverged;
}

int cmd_worstcase(const GlobalArgs& g, const std::string& case_path,
                  const std::string& solution_path) {
  auto cfg = effective_config(g);
  auto net = load_and_reweight(case_path, cfg);
  auto sf = rpop::io::read_solution(solution_path);
  auto x = rpop::io::to_master_solution(sf, net);
  auto u = rpop::robust::UncertaintySet::from_case(net, sf.uncertainty_level);
  auto rcfg = cfg.robust(nullptr);
  auto wc = rpop::robust::worst_case(net, x, u, rcfg);
  std::cout << "scenarios " << wc.subproblem_solves << "\n";
  std::cout << "worst_scenario " << wc.worst.id << " v2 " << wc.v2 << " slack " << wc.slack
            << "\n";
  if (g.verbose)
    for (const auto& oc : wc.outcomes)
      std::cout << "scenario " << oc.id << " v2 " << oc.v2 << " slack " << oc.slack << "\n";
  return kExitOk;
}

int cmd_sample(const GlobalArgs& g, const std::string& case_path,
               const std::string& solution_path, const std::string& out_prefix,
               std::optional<int> samples_flag, std::vector<double> levels_flag,
               std::optional<double> window_flag) {
  auto cfg = effective_config(g);
  auto net = load_and_reweight(case_path, cfg);
  auto sf = rpop::io::read_solution(solution_path);
  auto x = rpop::io::to_master_solution(sf, net);

  rpop::lab::SamplingPlan plan;
  plan.n_samples = samples_flag.value_or(cfg.n_samples);
  plan.seed = cfg.seed;
  plan.levels = levels_flag.empty() ? cfg.uncertainty_levels : levels_flag;
  plan.der_window = window_flag.value_or(cfg.der_window);
  plan.epsilon_sample = cfg.sample_epsilon;
  plan.threads = cfg.threads;

  auto report = rpop::lab::run_study(net, x, plan, cfg.formulation());

  nlohmann::ordered_json j;
  j["case"] = net.name;
  j["solution"] = solution_path;
  j["n_samples"] = report.n_samples;
  j["seed"] = report.seed;
  j["der_window"] = report.der_window;
  auto levels = nlohmann::ordered_json::array();
  for (const auto& lr : report.levels) {
    levels.push_back({{"level", lr.level},
                      {"n_feasible", lr.n_feasible},
                      {"fraction", lr.fraction},
                      {"worst_residual", lr.worst_residual}});
    std::cout << "level " << lr.level << " feasible " << lr.n_feasible << "/" << report.n_samples
              << " fraction " << lr.fraction << "\n";
  }
  j["levels"] = levels;

  std::ofstream js(out_prefix + ".json");
  js << j.dump(2) << "\n";
  std::ofstream csv(out_prefix + ".csv");
  csv << "level,n_feasible,fraction,worst_residual\n";
  for (const auto& lr : report.levels)
    csv << lr.level << "," << lr.n_feasible << "," << lr.fraction << "," << lr.worst_residual
        << "\n";
  return kExitOk;
}

int cmd_export(const std::string& solution_path, const std::string& format,
               const std::string& out_path) {
  auto sf = rpop::io::read_solution(solution_path);
  std::string text;
  if (format == "dot")
    text = rpop::io::to_dot(sf);
  else if (format == "json")
    text = rpop::io::to_json_text(sf);
  else
    throw rpop::CaseError(rpop::CaseError::Kind::Parse, "export", "format",
                          "unknown export format '" + format + "'");
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    out << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust partitioning and operation of distribution networks"};
  app.require_subcommand(0, 1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "config file (key = value lines)");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "RNG seed override");
  int threads_val = 0;
  auto* threads_opt = app.add_option("--threads", threads_val, "worker thread count");
  app.add_flag("--verbose", g.verbose, "extra logging");
  app.add_option("--dump-models", g.dump_dir, "directory for model dumps");
  app.add_flag("--print-config", g.print_config, "print the effective config and exit");

  std::string case_path, solution_path, out_path, format = "dot";
  std::optional<double> level_flag;
  bool file_bounds = false, fix_topology = false;
  std::optional<int> samples_flag;
  std::vector<double> levels_flag;
  std::optional<double> window_flag;

  auto* validate = app.add_subcommand("validate", "load and validate a case file");
  validate->fallthrough();
  validate->add_option("case", case_path)->required();

  auto* solve = app.add_subcommand("solve", "run the robust partitioning solve");
  solve->fallthrough();
  solve->add_option("case", case_path)->required();
  solve->add_option("-o,--out", out_path, "solution file path");
  double level_val = 0.0;
  auto* level_opt = solve->add_option("--level", level_val, "uncertainty level (e.g. 0.10)");
  solve->add_flag("--file-bounds", file_bounds, "use the case file's own load bounds");
  solve->add_flag("--fix-topology", fix_topology, "pin switches to their normally_closed state");

  auto* worst = app.add_subcommand("worstcase", "re-run the worst-case search for a solution");
  worst->fallthrough();
  worst->add_option("case", case_path)->required();
  worst->add_option("solution", solution_path)->required();

  auto* sample = app.add_subcommand("sample", "out-of-sample feasibility study");
  sample->fallthrough();
  sample->add_option("case", case_path)->required();
  sample->add_option("solution", solution_path)->required();
  sample->add_option("-o,--out", out_path, "report path prefix");
  int samples_val = 0;
  auto* samples_opt = sample->add_option("--samples", samples_val, "sample count");
  sample->add_option("--levels", levels_flag, "uncertainty levels")->delimiter(',');
  double window_val = 0.0;
  auto* window_opt = sample->add_option("--window", window_val, "DER dispatch window fraction");

  auto* exp = app.add_subcommand("export", "render a solution (dot or json)");
  exp->fallthrough();
  exp->add_option("solution", solution_path)->required();
  exp->add_option("--format", format, "dot | json");
  exp->add_option("-o,--out", out_path, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed_val;
  if (*threads_opt) g.threads = threads_val;
  if (*level_opt) level_flag = level_val;
  if (*samples_opt) samples_flag = samples_val;
  if (*window_opt) window_flag = window_val;

  try {
    if (g.print_config) {
      effective_config(g).print(std::cout);
      return kExitOk;
    }
    if (validate->parsed()) return cmd_validate(g, case_path);
    if (solve->parsed())
      return cmd_solve(g, case_path, out_path, level_flag, file_bounds, fix_topology);
    if (worst->parsed()) return cmd_worstcase(g, case_path, solution_path);
    if (sample->parsed())
      return cmd_sample(g, case_path, solution_path, out_path.empty() ? "report" : out_path,
                        samples_flag, levels_flag, window_flag);
    if (exp->parsed()) return cmd_export(solution_path, format, out_path);
    std::cout << app.help();
    return kExitOk;
  } catch (const rpop::CaseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind == rpop::CaseError::Kind::Invariant ? kExitValidation : kExitParse;
  } catch (const rpop::SolveError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
