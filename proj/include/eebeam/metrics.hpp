#pragma once

#include <vector>

#include "eebeam/power.hpp"
#include "eebeam/scenario.hpp"

namespace eebeam {

/// Downlink beamformers, one complex vector per user (units: sqrt-Watts).
struct BeamformerSet {
  std::vector<cvec> w;

  static BeamformerSet zeros(const ChannelSet& cs);
  /// Transmit power per BS: sum of ||w_k||^2 over served users.
  std::vector<double> per_bs_tx_power(const ChannelSet& cs) const;
};

/// Everything the rate/power metrics need besides channels and beamformers.
/// Built once per scheme; p_cp_w already includes the charged Q iterations.
struct SystemEnv {
  double alpha_hz = 0.0;   ///< effective bandwidth, rate = alpha * ln(1+SINR)
  double noise_w = 0.0;    ///< N0
  std::vector<double> p_max_w;   ///< per-BS power budget
  std::vector<double> p_cp_w;    ///< per-BS rate-independent circuit power
  std::vector<double> weights;   ///< omega_b
  PowerModelParams power;
  /// Fixed external interference per user (single-cell subproblems); empty = none.
  std::vector<double> extra_interference_w;

  double extra(int k) const {
    return extra_interference_w.empty() ? 0.0 : extra_interference_w[k];
  }
};

/// Env with uniform budgets/weights and circuit power from the scenario;
/// q_override < 0 keeps params.iteration_budget_q.
SystemEnv make_env(const ScenarioConfig& cfg, const PowerModelParams& params,
                   int q_override = -1);

/// |h_{b_k,k}^H w_k|^2 / (N0 + extra_k + sum_{j != k} |h_{b_j,k}^H w_j|^2)
double sinr(int k, const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env);

struct RateVector {
  std::vector<double> gamma;        ///< SINR per user
  std::vector<double> user_nats;    ///< alpha * ln(1+gamma)
  std::vector<double> bs_nats;      ///< per-BS sums
  double alpha_hz = 0.0;

  std::vector<double> bs_gbits() const;
};

RateVector rates(const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env);

/// Scalar MMSE receiver u_k = (sum_j |h_{b_j,k}^H w_j|^2 + N0)^{-1} h_{b_k,k}^H w_k.
cplx mmse_receiver(int k, const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env);

/// MSE of the scalar receive filter u applied to user k's observation:
/// |u|^2 (sum_j |h_{b_j,k}^H w_j|^2 + N0) - 2 Re(conj(u) h_{b_k,k}^H w_k) + 1.
/// With the MMSE receiver, 1 + SINR = 1/mse.
double mse(int k, const ChannelSet& cs, const BeamformerSet& bf, cplx u, const SystemEnv& env);

struct EeResult {
  double value;                      ///< objective, bit/Joule (weighted sum for wsum)
  std::vector<double> per_cell_ee;   ///< bit/Joule per cell
  RateVector rate;
  PowerSummary power;
};

/// Network EE: total rate over total power.
EeResult network_ee(const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env);

/// Weighted sum of per-cell EEs (per-cell rate over per-cell power).
EeResult wsum_ee(const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env);

/// Objective values under the per-user rate-dependent power model
/// (rate power = P_RD * sum_k delta(r_k)); evaluation only.
struct PerUserEe {
  double network;
  double wsum;
};
PerUserEe per_user_ee_objectives(const ChannelSet& cs, const BeamformerSet& bf,
                                 const SystemEnv& env);

}  // namespace eebeam
