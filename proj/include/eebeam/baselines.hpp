#pragma once

#include "eebeam/solver.hpp"

namespace eebeam {

struct BaselineOptions {
  int gauss_seidel_rounds = 3;  ///< rounds of per-cell best response
  int q_mmse = 1;               ///< charged iteration count for MMSE precoding
};

/// Normalized MMSE precoding directions:
/// (I + P_b/(K_b N0) sum_j h_{b_k,j} h_{b_k,j}^H)^{-1} h_{b_k,k}, unit norm.
std::vector<cvec> mmse_directions(const ChannelSet& cs, const SystemEnv& env);

/// Env for schemes whose per-iteration complexity charge replaces |K| by |K_b|
/// (uncoordinated / orthogonal access).
SystemEnv make_uncoordinated_env(const ScenarioConfig& cfg, const PowerModelParams& params);

/// Env for orthogonal access: per-BS bandwidth W/B and noise N0/B; the
/// bandwidth-dependent power terms scale along.
SystemEnv make_orthogonal_env(const ScenarioConfig& cfg, const PowerModelParams& params);

/// MMSE directions with energy-efficiency power allocation on top.
/// NetworkEE tag: joint power optimization of the network objective.
/// WeightedSumEE tag: per-cell own-EE optimization, Gauss-Seidel over cells.
RunResult run_mmse_power_allocation(const ChannelSet& design, const ChannelSet* truth,
                                    const ScenarioConfig& cfg, const PowerModelParams& params,
                                    ObjectiveKind tag, const SolverConfig& scfg,
                                    const BaselineOptions& opts = {});

/// Full-reuse, no coordination: each BS maximizes its own EE against the other
/// cells' latest beams, round-robin for a fixed number of rounds.
RunResult run_uncoordinated(const ChannelSet& design, const ChannelSet* truth,
                            const ScenarioConfig& cfg, const PowerModelParams& params,
                            const SolverConfig& scfg, const BaselineOptions& opts = {});

/// One sub-band per BS: bandwidth W/B, noise N0/B, no inter-cell interference.
RunResult run_orthogonal(const ChannelSet& design, const ChannelSet* truth,
                         const ScenarioConfig& cfg, const PowerModelParams& params,
                         const SolverConfig& scfg, const BaselineOptions& opts = {});

/// Optimizes with P_RD forced to zero, then evaluates the true objective.
RunResult run_rate_agnostic(const ChannelSet& design, const ChannelSet* truth,
                            const SystemEnv& env, SolverConfig scfg);

}  // namespace eebeam
