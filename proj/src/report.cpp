#include "eebeam/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace eebeam {

namespace {

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument(std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

void to_json(json& j, const ScenarioConfig& c) {
  j = json{{"cells", c.cells},
           {"antennas", c.antennas},
           {"users_per_cell", c.users_per_cell},
           {"inter_bs_distance_m", c.inter_bs_distance_m},
           {"cell_radius_m", c.cell_radius_m},
           {"bandwidth_hz", c.bandwidth_hz},
           {"coherence_uses", c.coherence_uses},
           {"tau_ul", c.tau_ul},
           {"tau_dl", c.tau_dl},
           {"noise_power_dbm", c.noise_power_dbm},
           {"tx_power_dbm", c.tx_power_dbm},
           {"shadow_std_db", c.shadow_std_db},
           {"seed", c.seed}};
}

void from_json(const json& j, ScenarioConfig& c) {
  reject_unknown(j,
                 {"cells", "antennas", "users_per_cell", "inter_bs_distance_m",
                  "cell_radius_m", "bandwidth_hz", "coherence_uses", "tau_ul", "tau_dl",
                  "noise_power_dbm", "tx_power_dbm", "shadow_std_db", "seed"},
                 "scenario");
  get_if_present(j, "cells", c.cells);
  get_if_present(j, "antennas", c.antennas);
  get_if_present(j, "users_per_cell", c.users_per_cell);
  get_if_present(j, "inter_bs_distance_m", c.inter_bs_distance_m);
  get_if_present(j, "cell_radius_m", c.cell_radius_m);
  get_if_present(j, "bandwidth_hz", c.bandwidth_hz);
  get_if_present(j, "coherence_uses", c.coherence_uses);
  get_if_present(j, "tau_ul", c.tau_ul);
  get_if_present(j, "tau_dl", c.tau_dl);
  get_if_present(j, "noise_power_dbm", c.noise_power_dbm);
  get_if_present(j, "tx_power_dbm", c.tx_power_dbm);
  get_if_present(j, "shadow_std_db", c.shadow_std_db);
  get_if_present(j, "seed", c.seed);
}

void to_json(json& j, const PowerModelParams& p) {
  j = json{{"eta", p.eta},
           {"p_fix_w", p.p_fix_w},
           {"p_bs_w", p.p_bs_w},
           {"p_syn_w", p.p_syn_w},
           {"p_ue_w", p.p_ue_w},
           {"p_ce_w", p.p_ce_w},
           {"l_bs_flops_per_w", p.l_bs_flops_per_w},
           {"p_rd", p.p_rd},
           {"m_exponent", p.m_exponent},
           {"iteration_budget_q", p.iteration_budget_q},
           {"c_lin", p.c_lin}};
}

void from_json(const json& j, PowerModelParams& p) {
  reject_unknown(j,
                 {"eta", "p_fix_w", "p_bs_w", "p_syn_w", "p_ue_w", "p_ce_w",
                  "l_bs_flops_per_w", "p_rd", "m_exponent", "iteration_budget_q", "c_lin"},
                 "power");
  get_if_present(j, "eta", p.eta);
  get_if_present(j, "p_fix_w", p.p_fix_w);
  get_if_present(j, "p_bs_w", p.p_bs_w);
  get_if_present(j, "p_syn_w", p.p_syn_w);
  get_if_present(j, "p_ue_w", p.p_ue_w);
  get_if_present(j, "p_ce_w", p.p_ce_w);
  get_if_present(j, "l_bs_flops_per_w", p.l_bs_flops_per_w);
  get_if_present(j, "p_rd", p.p_rd);
  get_if_present(j, "m_exponent", p.m_exponent);
  get_if_present(j, "iteration_budget_q", p.iteration_budget_q);
  get_if_present(j, "c_lin", p.c_lin);
}

namespace {
const char* mode_name(SolveMode m) {
  switch (m) {
    case SolveMode::Centralized: return "centralized";
    case SolveMode::Decentralized: return "decentralized";
    case SolveMode::CentralizedKkt: return "centralized-kkt";
  }
  return "decentralized";
}
}  // namespace

void to_json(json& j, const SolverConfig& c) {
  j = json{{"objective", c.objective == ObjectiveKind::NetworkEE ? "netee" : "wsum"},
           {"mode", mode_name(c.mode)},
           {"rho", c.rho},
           {"xi", c.xi},
           {"stall_window", c.stall_window},
           {"max_iterations", c.max_iterations},
           {"ota_budget", c.ota_budget},
           {"receiver_period", c.receiver_period},
           {"inner_xi", c.inner_xi},
           {"max_inner_iterations", c.max_inner_iterations},
           {"rate_power_aware", c.rate_power_aware},
           {"init_seed", c.init_seed}};
}

void from_json(const json& j, SolverConfig& c) {
  reject_unknown(j,
                 {"objective", "mode", "rho", "xi", "stall_window", "max_iterations",
                  "ota_budget", "receiver_period", "inner_xi", "max_inner_iterations",
                  "rate_power_aware", "init_seed"},
                 "solver");
  if (auto it = j.find("objective"); it != j.end()) {
    const std::string v = it->get<std::string>();
    if (v == "netee")
      c.objective = ObjectiveKind::NetworkEE;
    else if (v == "wsum")
      c.objective = ObjectiveKind::WeightedSumEE;
    else
      throw std::invalid_argument("solver: objective must be 'netee' or 'wsum'");
  }
  if (auto it = j.find("mode"); it != j.end()) {
    const std::string v = it->get<std::string>();
    if (v == "centralized")
      c.mode = SolveMode::Centralized;
    else if (v == "decentralized")
      c.mode = SolveMode::Decentralized;
    else if (v == "centralized-kkt")
      c.mode = SolveMode::CentralizedKkt;
    else
      throw std::invalid_argument(
          "solver: mode must be 'centralized', 'decentralized' or 'centralized-kkt'");
  }
  get_if_present(j, "rho", c.rho);
  get_if_present(j, "xi", c.xi);
  get_if_present(j, "stall_window", c.stall_window);
  get_if_present(j, "max_iterations", c.max_iterations);
  get_if_present(j, "ota_budget", c.ota_budget);
  get_if_present(j, "receiver_period", c.receiver_period);
  get_if_present(j, "inner_xi", c.inner_xi);
  get_if_present(j, "max_inner_iterations", c.max_inner_iterations);
  get_if_present(j, "rate_power_aware", c.rate_power_aware);
  get_if_present(j, "init_seed", c.init_seed);
  if (c.rho < 0.0 || c.rho > 1.0) throw std::invalid_argument("solver: rho must be in [0,1]");
  if (c.receiver_period < 1)
    throw std::invalid_argument("solver: receiver_period must be >= 1");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json report_to_json(const RunReport& rep) {
  json j;
  j["scheme"] = rep.scheme;
  j["scenario"] = rep.scenario;
  j["power"] = rep.power;
  j["solver"] = rep.solver;
  j["seed"] = rep.scenario.seed;
  j["wall_ms"] = rep.wall_ms;
  j["converged"] = rep.result.converged;
  j["diverged"] = rep.result.diverged;
  if (!rep.result.note.empty()) j["note"] = rep.result.note;
  j["iterations"] = rep.result.state.iterations;
  j["ota_iterations"] = rep.result.state.ota_iterations;
  j["backhaul_scalars"] = rep.result.state.backhaul_scalars;

  j["final"]["net_ee_bit_per_j"] = rep.result.net.value;
  j["final"]["wsum_ee_bit_per_j"] = rep.result.wsum.value;
  j["final"]["per_cell_ee_bit_per_j"] = rep.result.net.per_cell_ee;
  j["final"]["per_bs_rate_nats"] = rep.result.net.rate.bs_nats;
  j["final"]["per_user_sinr"] = rep.result.net.rate.gamma;
  j["final"]["per_bs_power_w"] = rep.result.net.power.per_bs_w;
  j["final"]["total_power_w"] = rep.result.net.power.total_w;

  json beams = json::array();
  for (const cvec& w : rep.result.state.w.w) {
    json wk = json::array();
    for (int i = 0; i < w.size(); ++i) wk.push_back({w(i).real(), w(i).imag()});
    beams.push_back(std::move(wk));
  }
  j["beamformers"] = std::move(beams);

  json trace = json::array();
  for (const TraceRow& row : rep.result.trace)
    trace.push_back({{"iteration", row.iteration},
                     {"objective", row.objective},
                     {"ota", row.ota},
                     {"backhaul", row.backhaul},
                     {"max_power_slack", row.max_power_slack}});
  j["trace"] = std::move(trace);
  return j;
}

void write_trace_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "iteration,objective,ota,backhaul_scalars,max_power_slack\n";
  for (const TraceRow& row : result.trace)
    out << row.iteration << ',' << format_double(row.objective) << ',' << row.ota << ','
        << row.backhaul << ',' << format_double(row.max_power_slack) << '\n';
}

void write_report_json(const RunReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  out << report_to_json(rep).dump(2) << '\n';
}

}  // namespace eebeam
