#pragma once

#include <string>
#include <vector>

#include "eebeam/baselines.hpp"
#include "eebeam/pilots.hpp"
#include "eebeam/report.hpp"

namespace eebeam {

/// One sweep: the cross product of the axes, `drops` channel realizations per
/// point, each drop run under every scheme.
struct ExperimentSpec {
  ScenarioConfig scenario;
  PowerModelParams power;
  SolverConfig solver;
  BaselineOptions baseline;
  std::vector<std::string> schemes = {"netee"};
  std::vector<double> p_rd_grid;  ///< empty: use power.p_rd
  std::vector<double> m_grid;
  std::vector<int> n_grid;
  std::vector<int> q_grid;
  std::vector<int> tau_ul_grid;
  std::string pilot_alloc = "orthogonal";  ///< orthogonal | proposed | greedy
  int drops = 50;
  std::uint64_t master_seed = 1;
  std::string out_dir = "out";
  int jobs = 1;
  bool write_traces = true;

  void validate() const;
};

void to_json(json& j, const ExperimentSpec& s);
void from_json(const json& j, ExperimentSpec& s);
ExperimentSpec load_experiment_spec(const std::string& path);

extern const std::vector<std::string> kKnownSchemes;

/// Runs one (scheme, drop) cell of a sweep point. Exposed for tests and the
/// acceptance suite.
RunReport run_scheme(const std::string& scheme, const ScenarioConfig& cfg,
                     const PowerModelParams& params, const SolverConfig& scfg,
                     const BaselineOptions& opts, const std::string& pilot_alloc);

/// Executes the sweep, writing results.csv (one row per point/drop/scheme,
/// sorted by key), per-run trace files and manifest.json under spec.out_dir.
/// Rows already present in results.csv are skipped.
void run_experiment(const ExperimentSpec& spec);

struct OracleResult {
  double best_power_w = 0.0;
  double best_ee_bit_per_j = 0.0;
};

/// Brute-force sweep of the transmit power of a single-BS single-user
/// instance along the matched-filter direction; the acceptance oracle.
OracleResult oracle_1d_power(const cvec& channel, const SystemEnv& env, int grid_size);

/// EE of that instance at transmit power p; the function the oracle sweeps.
double single_link_ee(double p_w, double channel_gain_sq, const SystemEnv& env);

/// Jain index (sum x)^2 / (n sum x^2) for nonnegative, not-all-zero values.
double fairness_index(const std::vector<double>& values);

}  // namespace eebeam
