#include "eebeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace eebeam {

namespace fs = std::filesystem;

const std::vector<std::string> kKnownSchemes = {
    "netee",           "wsum",           "netee-dec",       "wsum-dec",
    "netee-agnostic",  "wsum-agnostic",  "mmse-multicell",  "mmse-singlecell",
    "uncoordinated",   "orthogonal"};

void ExperimentSpec::validate() const {
  std::vector<std::string> problems;
  if (drops < 1) problems.push_back("drops must be >= 1");
  if (schemes.empty()) problems.push_back("schemes must be nonempty");
  for (const auto& s : schemes)
    if (std::find(kKnownSchemes.begin(), kKnownSchemes.end(), s) == kKnownSchemes.end())
      problems.push_back("unknown scheme '" + s + "'");
  auto check_axis = [&](const char* name, std::size_t n) {
    if (n == 0) problems.push_back(std::string("sweep axis '") + name + "' is empty");
  };
  // Axes default to singleton grids at the base config; an explicitly empty
  // axis in the file is rejected by from_json before we get here, so only the
  // resolved grids are checked.
  check_axis("p_rd", p_rd_grid.empty() ? 1 : p_rd_grid.size());
  if (pilot_alloc != "orthogonal" && pilot_alloc != "proposed" && pilot_alloc != "greedy")
    problems.push_back("pilot_alloc must be orthogonal, proposed or greedy");
  if (jobs < 1) problems.push_back("jobs must be >= 1");
  if (!problems.empty()) {
    std::string msg = "invalid experiment spec:";
    for (const auto& p : problems) msg += " [" + p + "]";
    throw std::invalid_argument(msg);
  }
}

void to_json(json& j, const ExperimentSpec& s) {
  j = json{{"scenario", s.scenario},
           {"power", s.power},
           {"solver", s.solver},
           {"schemes", s.schemes},
           {"pilot_alloc", s.pilot_alloc},
           {"drops", s.drops},
           {"master_seed", s.master_seed},
           {"out_dir", s.out_dir},
           {"jobs", s.jobs},
           {"write_traces", s.write_traces},
           {"gauss_seidel_rounds", s.baseline.gauss_seidel_rounds}};
  // empty axes mean "single point at the base config" and stay implicit
  if (!s.p_rd_grid.empty()) j["p_rd_grid"] = s.p_rd_grid;
  if (!s.m_grid.empty()) j["m_grid"] = s.m_grid;
  if (!s.n_grid.empty()) j["n_grid"] = s.n_grid;
  if (!s.q_grid.empty()) j["q_grid"] = s.q_grid;
  if (!s.tau_ul_grid.empty()) j["tau_ul_grid"] = s.tau_ul_grid;
}

void from_json(const json& j, ExperimentSpec& s) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::set<std::string> known = {
        "scenario", "power",       "solver",    "schemes",      "p_rd_grid",
        "m_grid",   "n_grid",      "q_grid",    "tau_ul_grid",  "pilot_alloc",
        "drops",    "master_seed", "out_dir",   "jobs",         "write_traces",
        "gauss_seidel_rounds"};
    if (!known.count(it.key()))
      throw std::invalid_argument("experiment: unknown key '" + it.key() + "'");
  }
  auto get = [&](const char* key, auto& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
  };
  get("scenario", s.scenario);
  get("power", s.power);
  get("solver", s.solver);
  get("schemes", s.schemes);
  auto get_axis = [&](const char* key, auto& out) {
    if (auto it = j.find(key); it != j.end()) {
      it->get_to(out);
      if (out.empty())
        throw std::invalid_argument(std::string("experiment: sweep axis '") + key +
                                    "' must be nonempty");
    }
  };
  get_axis("p_rd_grid", s.p_rd_grid);
  get_axis("m_grid", s.m_grid);
  get_axis("n_grid", s.n_grid);
  get_axis("q_grid", s.q_grid);
  get_axis("tau_ul_grid", s.tau_ul_grid);
  get("pilot_alloc", s.pilot_alloc);
  get("drops", s.drops);
  get("master_seed", s.master_seed);
  get("out_dir", s.out_dir);
  get("jobs", s.jobs);
  get("write_traces", s.write_traces);
  get("gauss_seidel_rounds", s.baseline.gauss_seidel_rounds);
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  json j = json::parse(in);
  ExperimentSpec spec = j.get<ExperimentSpec>();
  spec.validate();
  return spec;
}

RunReport run_scheme(const std::string& scheme, const ScenarioConfig& cfg,
                     const PowerModelParams& params, const SolverConfig& scfg,
                     const BaselineOptions& opts, const std::string& pilot_alloc) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc = make_scenario(cfg);

  // Pilot reuse: the optimizer designs on contaminated observations, the
  // final metrics use the true channels.
  ChannelSet design = sc.channels;
  const bool contaminated = cfg.tau_ul_eff() < cfg.total_users();
  if (contaminated) {
    PilotAllocation alloc;
    if (pilot_alloc == "proposed")
      alloc = allocate(sc.channels.path_gain, sc.channels.serving, cfg.tau_ul_eff(), cfg, params);
    else if (pilot_alloc == "greedy")
      alloc = allocate_greedy(sc.channels.path_gain, sc.channels.serving, cfg.tau_ul_eff(), cfg);
    else
      throw std::invalid_argument(
          "pilot_alloc 'orthogonal' requires tau_ul >= the total user count");
    design = contaminate(sc.channels, alloc).channels;
  }

  RunReport rep;
  rep.scheme = scheme;
  rep.scenario = cfg;
  rep.power = params;
  rep.solver = scfg;

  auto run_proposed = [&](ObjectiveKind kind, SolveMode mode, bool aware) {
    SolverConfig c = scfg;
    c.objective = kind;
    c.mode = mode;
    c.rate_power_aware = aware;
    Problem prob;
    prob.design = &design;
    prob.truth = &sc.channels;
    prob.env = make_env(cfg, params);
    return solve(prob, c);
  };

  if (scheme == "netee") {
    rep.result = run_proposed(ObjectiveKind::NetworkEE, SolveMode::Centralized, true);
  } else if (scheme == "wsum") {
    rep.result = run_proposed(ObjectiveKind::WeightedSumEE, SolveMode::Centralized, true);
  } else if (scheme == "netee-dec") {
    rep.result = run_proposed(ObjectiveKind::NetworkEE, SolveMode::Decentralized, true);
  } else if (scheme == "wsum-dec") {
    rep.result = run_proposed(ObjectiveKind::WeightedSumEE, SolveMode::Decentralized, true);
  } else if (scheme == "netee-agnostic") {
    rep.result = run_proposed(ObjectiveKind::NetworkEE, SolveMode::Centralized, false);
  } else if (scheme == "wsum-agnostic") {
    rep.result = run_proposed(ObjectiveKind::WeightedSumEE, SolveMode::Centralized, false);
  } else if (scheme == "mmse-multicell") {
    rep.result = run_mmse_power_allocation(design, &sc.channels, cfg, params,
                                           ObjectiveKind::NetworkEE, scfg, opts);
  } else if (scheme == "mmse-singlecell") {
    rep.result = run_mmse_power_allocation(design, &sc.channels, cfg, params,
                                           ObjectiveKind::WeightedSumEE, scfg, opts);
  } else if (scheme == "uncoordinated") {
    rep.result = run_uncoordinated(design, &sc.channels, cfg, params, scfg, opts);
  } else if (scheme == "orthogonal") {
    rep.result = run_orthogonal(design, &sc.channels, cfg, params, scfg, opts);
  } else {
    throw std::invalid_argument("unknown scheme '" + scheme + "'");
  }

  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

namespace {

struct SweepPoint {
  double p_rd;
  double m;
  int n;
  int q;
  int tau_ul;
  int index;
};

std::string point_key(const SweepPoint& pt, int drop, const std::string& scheme) {
  std::ostringstream os;
  os << format_double(pt.p_rd) << ',' << format_double(pt.m) << ',' << pt.n << ',' << pt.q
     << ',' << pt.tau_ul << ',' << drop << ',' << scheme;
  return os.str();
}

constexpr const char* kCsvHeader =
    "p_rd,m,n,q,tau_ul,drop,seed,scheme,net_ee,wsum_ee,sum_rate_bps,total_power_w,jain_ee,"
    "iterations,ota,backhaul,converged";

std::string csv_row(const SweepPoint& pt, int drop, std::uint64_t seed, const RunReport& rep) {
  const RunResult& r = rep.result;
  double sum_rate = 0.0;
  for (double v : r.net.rate.bs_nats) sum_rate += v * kNatsToBits;
  std::ostringstream os;
  os << format_double(pt.p_rd) << ',' << format_double(pt.m) << ',' << pt.n << ',' << pt.q
     << ',' << pt.tau_ul << ',' << drop << ',' << seed << ',' << rep.scheme << ','
     << format_double(r.net.value) << ',' << format_double(r.wsum.value) << ','
     << format_double(sum_rate) << ',' << format_double(r.net.power.total_w) << ','
     << format_double(fairness_index(r.net.per_cell_ee)) << ',' << r.state.iterations << ','
     << r.state.ota_iterations << ',' << r.state.backhaul_scalars << ','
     << (r.converged ? 1 : 0);
  return os.str();
}

std::string sanitize(const std::string& key) {
  std::string out = key;
  for (char& ch : out)
    if (ch == ',' || ch == '.' || ch == '/') ch = '_';
  return out;
}

}  // namespace

void run_experiment(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  spec.validate();
  if (spec.p_rd_grid.empty()) spec.p_rd_grid = {spec.power.p_rd};
  if (spec.m_grid.empty()) spec.m_grid = {spec.power.m_exponent};
  if (spec.n_grid.empty()) spec.n_grid = {spec.scenario.antennas};
  if (spec.q_grid.empty()) spec.q_grid = {spec.power.iteration_budget_q};
  if (spec.tau_ul_grid.empty()) spec.tau_ul_grid = {spec.scenario.tau_ul_eff()};

  fs::create_directories(spec.out_dir);
  if (spec.write_traces) fs::create_directories(fs::path(spec.out_dir) / "traces");
  const fs::path csv_path = fs::path(spec.out_dir) / "results.csv";

  // Resume: rows already present keep their text verbatim.
  std::map<std::string, std::string> rows;
  if (fs::exists(csv_path)) {
    std::ifstream in(csv_path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      // key = first 5 fields + drop + scheme (fields 0-4, 5, 7)
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (fields.size() < 8) continue;
      const std::string key = fields[0] + ',' + fields[1] + ',' + fields[2] + ',' + fields[3] +
                              ',' + fields[4] + ',' + fields[5] + ',' + fields[7];
      rows[key] = line;
    }
  }

  std::vector<SweepPoint> points;
  int index = 0;
  for (double p_rd : spec.p_rd_grid)
    for (double m : spec.m_grid)
      for (int n : spec.n_grid)
        for (int q : spec.q_grid)
          for (int tau : spec.tau_ul_grid) points.push_back({p_rd, m, n, q, tau, index++});

  struct Cell {
    SweepPoint pt;
    int drop;
    std::string scheme;
  };
  std::vector<Cell> todo;
  for (const auto& pt : points)
    for (int drop = 0; drop < spec.drops; ++drop)
      for (const auto& scheme : spec.schemes)
        if (!rows.count(point_key(pt, drop, scheme))) todo.push_back({pt, drop, scheme});

  std::mutex sink;
  auto run_cell = [&](const Cell& cell) {
    ScenarioConfig cfg = spec.scenario;
    cfg.antennas = cell.pt.n;
    cfg.tau_ul = cell.pt.tau_ul;
    cfg.seed = derive_seed(spec.master_seed, {static_cast<std::uint64_t>(cell.pt.index),
                                              static_cast<std::uint64_t>(cell.drop)});
    PowerModelParams params = spec.power;
    params.p_rd = cell.pt.p_rd;
    params.m_exponent = cell.pt.m;
    params.iteration_budget_q = cell.pt.q;

    RunReport rep =
        run_scheme(cell.scheme, cfg, params, spec.solver, spec.baseline, spec.pilot_alloc);
    const std::string key = point_key(cell.pt, cell.drop, cell.scheme);
    if (spec.write_traces)
      write_trace_csv(rep.result,
                      (fs::path(spec.out_dir) / "traces" / (sanitize(key) + ".csv")).string());
    std::lock_guard<std::mutex> lock(sink);
    rows[key] = csv_row(cell.pt, cell.drop, cfg.seed, rep);
  };

  if (spec.jobs <= 1) {
    for (const auto& cell : todo) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < spec.jobs; ++t)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) run_cell(todo[i]);
      });
    for (auto& w : workers) w.join();
  }

  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write results file: " + csv_path.string());
  out << kCsvHeader << '\n';
  for (const auto& [key, line] : rows) out << line << '\n';

  json manifest;
  manifest["spec"] = spec;
  manifest["rows"] = rows.size();
  manifest["columns"] = kCsvHeader;
  std::ofstream mf(fs::path(spec.out_dir) / "manifest.json");
  mf << manifest.dump(2) << '\n';
}

double single_link_ee(double p_w, double channel_gain_sq, const SystemEnv& env) {
  const double rate_nats = env.alpha_hz * std::log1p(p_w * channel_gain_sq / env.noise_w);
  const double watts = p_w / env.power.eta + env.p_cp_w[0] +
                       env.power.p_rd * delta(nats_to_gbits(rate_nats), env.power.m_exponent);
  return rate_nats * kNatsToBits / watts;
}

OracleResult oracle_1d_power(const cvec& channel, const SystemEnv& env, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("oracle: grid size must be >= 2");
  const double gain = channel.squaredNorm();
  const double p_max = env.p_max_w[0];
  OracleResult best;
  for (int i = 0; i < grid_size; ++i) {
    const double p = p_max * i / (grid_size - 1);
    const double ee = single_link_ee(p, gain, env);
    if (ee > best.best_ee_bit_per_j) {
      best.best_ee_bit_per_j = ee;
      best.best_power_w = p;
    }
  }
  return best;
}

double fairness_index(const std::vector<double>& values) {
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    if (v < 0.0) throw std::domain_error("fairness_index: values must be nonnegative");
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) throw std::domain_error("fairness_index: all values are zero");
  return sum * sum / (values.size() * sum_sq);
}

}  // namespace eebeam
