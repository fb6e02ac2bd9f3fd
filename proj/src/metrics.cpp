#include "eebeam/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace eebeam {

BeamformerSet BeamformerSet::zeros(const ChannelSet& cs) {
  BeamformerSet bf;
  bf.w.assign(cs.num_users(), cvec::Zero(cs.antennas()));
  return bf;
}

std::vector<double> BeamformerSet::per_bs_tx_power(const ChannelSet& cs) const {
  std::vector<double> tx(cs.num_bs(), 0.0);
  for (int k = 0; k < cs.num_users(); ++k) tx[cs.serving[k]] += w[k].squaredNorm();
  return tx;
}

SystemEnv make_env(const ScenarioConfig& cfg, const PowerModelParams& params, int q_override) {
  cfg.validate();
  params.validate();
  SystemEnv env;
  env.alpha_hz = cfg.effective_bandwidth_hz();
  env.noise_w = cfg.noise_power_w();
  env.power = params;
  const int q = q_override < 0 ? params.iteration_budget_q : q_override;
  env.power.p_lp_c_w = q * iteration_power_w(cfg.antennas, cfg.total_users(),
                                             cfg.users_per_cell, params, cfg.bandwidth_hz,
                                             cfg.coherence_uses);
  const double p_cp = circuit_power_w(cfg.antennas, cfg.users_per_cell, env.power,
                                      cfg.overhead_fraction(), cfg.bandwidth_hz);
  env.p_max_w.assign(cfg.cells, cfg.tx_power_w());
  env.p_cp_w.assign(cfg.cells, p_cp);
  env.weights.assign(cfg.cells, 1.0);
  return env;
}

namespace {

// Received power at user k from every user's beam: |h_{b_j,k}^H w_j|^2.
double total_received_power(int k, const ChannelSet& cs, const BeamformerSet& bf,
                            double* desired = nullptr) {
  double sum = 0.0;
  for (int j = 0; j < cs.num_users(); ++j) {
    const cplx g = cs.h[cs.serving[j]].col(k).dot(bf.w[j]);
    const double p = std::norm(g);
    sum += p;
    if (desired && j == k) *desired = p;
  }
  return sum;
}

}  // namespace

double sinr(int k, const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env) {
  if (bf.w[k].size() != cs.antennas())
    throw std::invalid_argument("sinr: beamformer/channel dimension mismatch");
  double desired = 0.0;
  const double total = total_received_power(k, cs, bf, &desired);
  return desired / (env.noise_w + env.extra(k) + (total - desired));
}

RateVector rates(const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env) {
  RateVector rv;
  rv.alpha_hz = env.alpha_hz;
  rv.gamma.resize(cs.num_users());
  rv.user_nats.resize(cs.num_users());
  rv.bs_nats.assign(cs.num_bs(), 0.0);
  for (int k = 0; k < cs.num_users(); ++k) {
    rv.gamma[k] = sinr(k, cs, bf, env);
    rv.user_nats[k] = env.alpha_hz * std::log1p(rv.gamma[k]);
    rv.bs_nats[cs.serving[k]] += rv.user_nats[k];
  }
  return rv;
}

std::vector<double> RateVector::bs_gbits() const {
  std::vector<double> out(bs_nats.size());
  for (std::size_t b = 0; b < bs_nats.size(); ++b) out[b] = nats_to_gbits(bs_nats[b]);
  return out;
}

cplx mmse_receiver(int k, const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env) {
  const double den = total_received_power(k, cs, bf) + env.noise_w + env.extra(k);
  const cplx g = cs.h[cs.serving[k]].col(k).dot(bf.w[k]);
  return g / den;
}

double mse(int k, const ChannelSet& cs, const BeamformerSet& bf, cplx u, const SystemEnv& env) {
  const double den = total_received_power(k, cs, bf) + env.noise_w + env.extra(k);
  const cplx g = cs.h[cs.serving[k]].col(k).dot(bf.w[k]);
  return std::norm(u) * den - 2.0 * std::real(std::conj(u) * g) + 1.0;
}

EeResult network_ee(const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env) {
  EeResult res;
  res.rate = rates(cs, bf, env);
  res.power = total_power(bf.per_bs_tx_power(cs), res.rate.bs_gbits(), env.p_cp_w, env.power);
  double bits = 0.0;
  for (double r : res.rate.bs_nats) bits += r * kNatsToBits;
  res.value = bits / res.power.total_w;
  res.per_cell_ee.resize(cs.num_bs());
  for (int b = 0; b < cs.num_bs(); ++b)
    res.per_cell_ee[b] = res.rate.bs_nats[b] * kNatsToBits / res.power.per_bs_w[b];
  return res;
}

EeResult wsum_ee(const ChannelSet& cs, const BeamformerSet& bf, const SystemEnv& env) {
  EeResult res = network_ee(cs, bf, env);
  res.value = 0.0;
  for (int b = 0; b < cs.num_bs(); ++b) {
    if (env.weights[b] < 0.0) throw std::domain_error("wsum_ee: weights must be nonnegative");
    res.value += env.weights[b] * res.per_cell_ee[b];
  }
  return res;
}

PerUserEe per_user_ee_objectives(const ChannelSet& cs, const BeamformerSet& bf,
                                 const SystemEnv& env) {
  const RateVector rv = rates(cs, bf, env);
  const std::vector<double> tx = bf.per_bs_tx_power(cs);
  PerUserEe out{0.0, 0.0};
  double total_bits = 0.0, total_power_w = 0.0;
  double wsum = 0.0;
  for (int b = 0; b < cs.num_bs(); ++b) {
    double rate_dep = 0.0;
    for (int k : cs.cell_users[b])
      rate_dep += env.power.p_rd * delta(nats_to_gbits(rv.user_nats[k]), env.power.m_exponent);
    const double g_b = tx[b] / env.power.eta + env.p_cp_w[b];
    const double bits_b = rv.bs_nats[b] * kNatsToBits;
    total_bits += bits_b;
    total_power_w += g_b + rate_dep;
    wsum += env.weights[b] * bits_b / (g_b + rate_dep);
  }
  out.network = total_bits / total_power_w;
  out.wsum = wsum;
  return out;
}

}  // namespace eebeam
