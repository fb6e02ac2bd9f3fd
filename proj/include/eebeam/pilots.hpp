#pragma once

#include <vector>

#include "eebeam/power.hpp"
#include "eebeam/scenario.hpp"

namespace eebeam {

/// Two-size grouping arithmetic for tau pilot resources over K users:
/// m_max = ceil(K/tau), m_min = m_max - 1, x_max groups of size m_max and
/// x_min of size m_min partitioning all users over exactly tau resources.
struct GroupSizes {
  int m_max = 0;
  int m_min = 0;
  int x_max = 0;
  int x_min = 0;
};

GroupSizes group_sizes(int k_total, int tau);

/// Inputs of the group energy-efficiency metric, fixed for one allocation run.
struct PilotContext {
  const Eigen::MatrixXd* path_gain = nullptr;  ///< B x K linear gains
  const std::vector<int>* serving = nullptr;
  std::vector<double> p_max_w;   ///< per BS
  std::vector<int> cell_size;    ///< |K_b|
  double alpha_hz = 0.0;         ///< effective bandwidth at the candidate tau
  double noise_w = 0.0;
  double p_cp_total_w = 0.0;     ///< sum over BSs of circuit power
  double eta = 0.2;
  double p_rd = 0.0;
  double m_exponent = 1.0;
  int total_users = 0;
};

/// Context for allocating tau uplink pilots under the given scenario/power
/// parameters (downlink pilots stay orthogonal).
PilotContext make_pilot_context(const Eigen::MatrixXd& path_gain,
                                const std::vector<int>& serving,
                                const ScenarioConfig& cfg, const PowerModelParams& params,
                                int tau_ul);

/// Group energy-efficiency metric: sum of equal-power-split SINR-based rates
/// over the group's share of transmit and circuit power plus its
/// rate-dependent term. Used for ranking candidate pilot groups.
double group_metric(const std::vector<int>& group, const PilotContext& ctx);

/// Energy-efficiency-driven pilot grouping: rank all size-m_min candidate
/// groups by the metric, fix the best disjoint x_min of them, then do the same
/// with size-m_max groups over the remaining users.
PilotAllocation allocate(const Eigen::MatrixXd& path_gain, const std::vector<int>& serving,
                         int tau, const ScenarioConfig& cfg, const PowerModelParams& params,
                         std::size_t candidate_cap = 1000000);

/// Same two-phase structure ranked by the sum of own-cell path gains.
PilotAllocation allocate_greedy(const Eigen::MatrixXd& path_gain,
                                const std::vector<int>& serving, int tau,
                                const ScenarioConfig& cfg,
                                std::size_t candidate_cap = 1000000);

}  // namespace eebeam
