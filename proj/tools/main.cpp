#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "eebeam/harness.hpp"

namespace {

int fail(const std::string& what, const std::string& detail) {
  eebeam::json err;
  err["error"] = what;
  if (!detail.empty()) err["detail"] = detail;
  std::cerr << err.dump() << std::endl;
  return 1;
}

int cmd_run(const std::string& spec_path, const std::string& out_dir, long long seed,
            int drops, const std::vector<std::string>& schemes, int jobs) {
  eebeam::ExperimentSpec spec = eebeam::load_experiment_spec(spec_path);
  if (!out_dir.empty()) spec.out_dir = out_dir;
  if (seed >= 0) spec.master_seed = static_cast<std::uint64_t>(seed);
  if (drops > 0) spec.drops = drops;
  if (!schemes.empty()) spec.schemes = schemes;
  if (jobs > 0) spec.jobs = jobs;
  spec.validate();
  eebeam::run_experiment(spec);
  std::cout << "wrote " << spec.out_dir << "/results.csv" << std::endl;
  return 0;
}

int cmd_oracle(const std::string& config_path, long long seed, int grid) {
  eebeam::ScenarioConfig cfg;
  eebeam::PowerModelParams params;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    eebeam::json j = eebeam::json::parse(in);
    if (j.contains("scenario")) j["scenario"].get_to(cfg);
    if (j.contains("power")) j["power"].get_to(params);
  }
  cfg.cells = 1;
  cfg.users_per_cell = 1;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  const eebeam::Scenario sc = eebeam::make_scenario(cfg);
  const eebeam::SystemEnv env = eebeam::make_env(cfg, params);
  const eebeam::OracleResult res =
      eebeam::oracle_1d_power(sc.channels.h[0].col(0), env, grid);
  eebeam::json out;
  out["seed"] = cfg.seed;
  out["grid"] = grid;
  out["best_power_w"] = res.best_power_w;
  out["best_ee_bit_per_j"] = res.best_ee_bit_per_j;
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int cmd_report(const std::string& dir) {
  std::ifstream in(dir + "/results.csv");
  if (!in) throw std::runtime_error("no results.csv under " + dir);
  std::string header;
  std::getline(in, header);
  struct Acc {
    double net = 0, wsum = 0, power = 0;
    int n = 0;
  };
  std::map<std::string, Acc> by_scheme;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() < 12) continue;
    Acc& acc = by_scheme[f[7]];
    acc.net += std::stod(f[8]);
    acc.wsum += std::stod(f[9]);
    acc.power += std::stod(f[11]);
    ++acc.n;
  }
  std::cout << "scheme,rows,mean_net_ee,mean_wsum_ee,mean_total_power_w\n";
  for (const auto& [scheme, acc] : by_scheme)
    std::cout << scheme << ',' << acc.n << ',' << acc.net / acc.n << ',' << acc.wsum / acc.n
              << ',' << acc.power / acc.n << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient coordinated beamforming experiments"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, config_path, report_dir;
  long long seed = -1;
  int drops = 0, jobs = 0, grid = 10000;
  std::vector<std::string> schemes;

  auto* run = app.add_subcommand("run", "execute an experiment spec");
  run->add_option("spec", spec_path, "experiment spec JSON file")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--seed", seed, "master seed override");
  run->add_option("--drops", drops, "drops-per-point override");
  run->add_option("--scheme", schemes, "restrict to these schemes");
  run->add_option("--jobs", jobs, "worker thread count");

  auto* oracle = app.add_subcommand("oracle", "brute-force single-link EE optimum");
  oracle->add_option("--config", config_path, "scenario/power JSON file");
  oracle->add_option("--seed", seed, "scenario seed");
  oracle->add_option("--grid", grid, "power grid size");

  auto* report = app.add_subcommand("report", "summarize a results directory");
  report->add_option("dir", report_dir, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(spec_path, out_dir, seed, drops, schemes, jobs);
    if (oracle->parsed()) return cmd_oracle(config_path, seed, grid);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const std::invalid_argument& e) {
    return fail("invalid argument", e.what());
  } catch (const std::exception& e) {
    return fail("runtime error", e.what());
  }
  return fail("no subcommand", "");
}
