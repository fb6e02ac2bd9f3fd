#include "eebeam/power.hpp"

#include <cmath>
#include <stdexcept>

namespace eebeam {

void PowerModelParams::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("power: eta must be in (0,1]");
  if (m_exponent < 1.0) throw std::invalid_argument("power: exponent m must be >= 1");
  if (p_fix_w < 0 || p_bs_w < 0 || p_syn_w < 0 || p_ue_w < 0 || p_ce_w < 0 || p_lp_c_w < 0 ||
      p_rd < 0 || c_lin < 0)
    throw std::invalid_argument("power: all power constants must be nonnegative");
  if (l_bs_flops_per_w <= 0) throw std::invalid_argument("power: L_BS must be positive");
  if (iteration_budget_q < 1) throw std::invalid_argument("power: Q must be >= 1");
}

double delta(double rate_gbps, double m) {
  if (rate_gbps < 0.0) throw std::domain_error("delta: rate must be nonnegative");
  if (rate_gbps == 0.0) return 0.0;
  return std::pow(rate_gbps, m);
}

double delta_prime(double rate_gbps, double m) {
  if (rate_gbps < 0.0) throw std::domain_error("delta_prime: rate must be nonnegative");
  if (rate_gbps == 0.0) return (m == 1.0) ? 1.0 : 0.0;
  return m * std::pow(rate_gbps, m - 1.0);
}

double circuit_power_w(int n_b, int k_b, const PowerModelParams& p,
                       double overhead_fraction, double bandwidth_hz) {
  const double p_tc = n_b * p.p_bs_w + p.p_syn_w + k_b * p.p_ue_w;
  const double p_lp =
      overhead_fraction * bandwidth_hz * 2.0 * n_b * k_b / p.l_bs_flops_per_w + p.p_lp_c_w;
  return p.p_fix_w + p_tc + p.p_ce_w + p_lp;
}

double iteration_power_w(int n_b, int k_total, int k_b, const PowerModelParams& p,
                         double bandwidth_hz, int coherence_uses) {
  const double n = n_b;
  const double flops = n * n * n / 3.0 + 3.0 * k_total * n * n + 2.0 * n * n * k_b +
                       p.c_lin * k_total;
  return bandwidth_hz / coherence_uses * flops / p.l_bs_flops_per_w;
}

PowerSummary total_power(const std::vector<double>& per_bs_tx_w,
                         const std::vector<double>& per_bs_rate_gbps,
                         const std::vector<double>& p_cp_w, const PowerModelParams& p) {
  const std::size_t num_bs = per_bs_tx_w.size();
  if (per_bs_rate_gbps.size() != num_bs || p_cp_w.size() != num_bs)
    throw std::invalid_argument("total_power: per-BS vectors must have equal length");
  PowerSummary out;
  out.per_bs_w.resize(num_bs);
  out.rate_independent_w.resize(num_bs);
  for (std::size_t b = 0; b < num_bs; ++b) {
    if (per_bs_rate_gbps[b] < 0.0) throw std::domain_error("total_power: negative rate");
    const double g_b = per_bs_tx_w[b] / p.eta + p_cp_w[b];
    out.rate_independent_w[b] = g_b;
    out.per_bs_w[b] = g_b + p.p_rd * delta(per_bs_rate_gbps[b], p.m_exponent);
    out.rate_independent_total_w += g_b;
    out.total_w += out.per_bs_w[b];
  }
  return out;
}

}  // namespace eebeam
