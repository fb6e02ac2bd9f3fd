#pragma once

#include <json.hpp>
#include <string>

#include "eebeam/solver.hpp"

namespace eebeam {

using json = nlohmann::json;

// Config (de)serialization; unknown keys are rejected to catch typos.
void to_json(json& j, const ScenarioConfig& c);
void from_json(const json& j, ScenarioConfig& c);
void to_json(json& j, const PowerModelParams& p);
void from_json(const json& j, PowerModelParams& p);
void to_json(json& j, const SolverConfig& c);
void from_json(const json& j, SolverConfig& c);

/// Everything one run produced, self-contained enough to recompute its EEs:
/// the scenario/seed regenerate the channels, the beamformers are stored.
struct RunReport {
  std::string scheme;
  ScenarioConfig scenario;
  PowerModelParams power;
  SolverConfig solver;
  double wall_ms = 0.0;
  RunResult result;
};

json report_to_json(const RunReport& rep);

/// Writes the per-iteration trace:
/// iteration,objective,ota,backhaul_scalars,max_power_slack
void write_trace_csv(const RunResult& result, const std::string& path);

void write_report_json(const RunReport& rep, const std::string& path);

/// Formats a double so that reading it back reproduces the exact bits.
std::string format_double(double v);

}  // namespace eebeam
