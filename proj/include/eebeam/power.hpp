#pragma once

#include <vector>

#include "eebeam/common.hpp"

namespace eebeam {

/// Constants of the per-BS power consumption model. Defaults follow the
/// small-cell parameter set used throughout the experiments.
struct PowerModelParams {
  double eta = 0.2;  ///< power amplifier efficiency, (0,1]
  double p_fix_w = 3.0;
  double p_bs_w = 0.4;   ///< per RF chain
  double p_syn_w = 1.0;  ///< local oscillator
  double p_ue_w = 0.1;   ///< per served user
  double p_ce_w = 0.05;  ///< channel estimation
  double p_lp_c_w = 0.0; ///< beamformer-computation power, normally Q * iteration_power_w
  double l_bs_flops_per_w = 12.8e9;
  double p_rd = 2.4;        ///< W per (Gbit/s)^m
  double m_exponent = 1.2;  ///< rate exponent, >= 1
  int iteration_budget_q = 20;
  double c_lin = 0.0;  ///< coefficient of the linear-in-|K| term of the per-iteration cost

  void validate() const;
};

/// Rate-dependent processing power shape: delta(y) = y^m, y in Gbit/s.
double delta(double rate_gbps, double m);

/// d/dy of delta.
double delta_prime(double rate_gbps, double m);

inline double nats_to_gbits(double rate_nats) { return rate_nats * kNatsToGbits; }

/// Rate-independent circuit power of one BS:
/// P_FIX + (N_b*P_BS + P_SYN + K_b*P_UE) + P_CE + P_LP with
/// P_LP = overhead_fraction * W * 2*N_b*K_b / L_BS + P_LP,c.
double circuit_power_w(int n_b, int k_b, const PowerModelParams& p,
                       double overhead_fraction, double bandwidth_hz);

/// Per-BS, per-iteration beamformer computation power:
/// (W/U) * (N_b^3/(3 L_BS) + (3 |K| N_b^2 + 2 N_b^2 K_b + c_lin |K|) / L_BS).
double iteration_power_w(int n_b, int k_total, int k_b, const PowerModelParams& p,
                         double bandwidth_hz, int coherence_uses);

/// Total consumed power, per BS and network-wide.
struct PowerSummary {
  std::vector<double> per_bs_w;             ///< transmit/eta + circuit + rate-dependent
  std::vector<double> rate_independent_w;   ///< g_b = transmit/eta + circuit
  double rate_independent_total_w = 0.0;    ///< g = sum of g_b
  double total_w = 0.0;
};

/// per_bs_tx_w[b] = sum of ||w_k||^2 over users served by b; rates in Gbit/s.
PowerSummary total_power(const std::vector<double>& per_bs_tx_w,
                         const std::vector<double>& per_bs_rate_gbps,
                         const std::vector<double>& p_cp_w, const PowerModelParams& p);

}  // namespace eebeam
