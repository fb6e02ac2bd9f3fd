#include "eebeam/baselines.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace eebeam {

std::vector<cvec> mmse_directions(const ChannelSet& cs, const SystemEnv& env) {
  const int n = cs.antennas();
  std::vector<cvec> dirs(cs.num_users(), cvec::Zero(n));
  for (int b = 0; b < cs.num_bs(); ++b) {
    const auto& users = cs.cell_users[b];
    if (users.empty()) continue;
    const double coef = env.p_max_w[b] / (users.size() * env.noise_w);
    cmat a = cmat::Identity(n, n);
    for (int j = 0; j < cs.num_users(); ++j)
      a.noalias() += coef * cs.h[b].col(j) * cs.h[b].col(j).adjoint();
    Eigen::LLT<cmat> llt(a);
    for (int k : users) {
      cvec dir = llt.solve(cs.h[b].col(k));
      const double nrm = dir.norm();
      if (nrm > 0.0) dirs[k] = dir / nrm;
    }
  }
  return dirs;
}

SystemEnv make_uncoordinated_env(const ScenarioConfig& cfg, const PowerModelParams& params) {
  SystemEnv env = make_env(cfg, params);
  // No coordination: the per-iteration complexity scales with the own-cell
  // user count only.
  env.power.p_lp_c_w =
      params.iteration_budget_q *
      iteration_power_w(cfg.antennas, cfg.users_per_cell, cfg.users_per_cell, params,
                        cfg.bandwidth_hz, cfg.coherence_uses);
  const double p_cp = circuit_power_w(cfg.antennas, cfg.users_per_cell, env.power,
                                      cfg.overhead_fraction(), cfg.bandwidth_hz);
  env.p_cp_w.assign(cfg.cells, p_cp);
  return env;
}

SystemEnv make_orthogonal_env(const ScenarioConfig& cfg, const PowerModelParams& params) {
  SystemEnv env = make_env(cfg, params);
  const double w_sub = cfg.bandwidth_hz / cfg.cells;
  env.alpha_hz = cfg.overhead_fraction() * w_sub;
  env.noise_w = cfg.noise_power_w() / cfg.cells;
  env.power.p_lp_c_w =
      params.iteration_budget_q *
      iteration_power_w(cfg.antennas, cfg.users_per_cell, cfg.users_per_cell, params, w_sub,
                        cfg.coherence_uses);
  const double p_cp = circuit_power_w(cfg.antennas, cfg.users_per_cell, env.power,
                                      cfg.overhead_fraction(), w_sub);
  env.p_cp_w.assign(cfg.cells, p_cp);
  return env;
}

namespace {

// Channels of one cell viewed in isolation: a single BS serving its own users.
ChannelSet extract_cell(const ChannelSet& cs, int b) {
  const auto& users = cs.cell_users[b];
  ChannelSet sub;
  sub.h.resize(1);
  sub.h[0].resize(cs.antennas(), users.size());
  sub.path_gain.resize(1, users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    sub.h[0].col(i) = cs.h[b].col(users[i]);
    sub.path_gain(0, i) = cs.path_gain(b, users[i]);
  }
  sub.serving.assign(users.size(), 0);
  sub.cell_users.resize(1);
  for (std::size_t i = 0; i < users.size(); ++i) sub.cell_users[0].push_back(static_cast<int>(i));
  return sub;
}

// Inter-cell interference seen by user k under the given beams.
double external_interference(const ChannelSet& cs, const BeamformerSet& bf, int k) {
  double sum = 0.0;
  for (int j = 0; j < cs.num_users(); ++j) {
    if (cs.serving[j] == cs.serving[k]) continue;
    sum += std::norm(cs.h[cs.serving[j]].col(k).dot(bf.w[j]));
  }
  return sum;
}

SystemEnv sub_env(const SystemEnv& env, int b, std::vector<double> extra) {
  SystemEnv sub;
  sub.alpha_hz = env.alpha_hz;
  sub.noise_w = env.noise_w;
  sub.p_max_w = {env.p_max_w[b]};
  sub.p_cp_w = {env.p_cp_w[b]};
  sub.weights = {1.0};
  sub.power = env.power;
  sub.extra_interference_w = std::move(extra);
  return sub;
}

// Gauss-Seidel rounds of per-cell own-EE solves with the other cells' latest
// beams frozen as noise. Shared by the uncoordinated baseline and the
// single-cell MMSE power allocation (which passes fixed directions).
RunResult gauss_seidel_percell(const ChannelSet& design, const ChannelSet* truth,
                               const SystemEnv& eval_env, const std::vector<cvec>* dirs,
                               const SolverConfig& scfg, int rounds) {
  RunResult res;
  BeamformerSet w = BeamformerSet::zeros(design);
  SolverConfig sub_cfg = scfg;
  sub_cfg.objective = ObjectiveKind::WeightedSumEE;
  sub_cfg.mode = SolveMode::Centralized;
  sub_cfg.init_seed = 0;

  long long iters = 0;
  for (int round = 0; round < rounds; ++round) {
    for (int b = 0; b < design.num_bs(); ++b) {
      const auto& users = design.cell_users[b];
      if (users.empty()) continue;
      ChannelSet cell = extract_cell(design, b);
      std::vector<double> extra(users.size());
      for (std::size_t i = 0; i < users.size(); ++i)
        extra[i] = external_interference(design, w, users[i]);
      Problem prob;
      prob.design = &cell;
      prob.env = sub_env(eval_env, b, std::move(extra));
      if (dirs) {
        prob.fixed_directions.resize(users.size());
        for (std::size_t i = 0; i < users.size(); ++i)
          prob.fixed_directions[i] = (*dirs)[users[i]];
      }
      RunResult cell_res = solve(prob, sub_cfg);
      for (std::size_t i = 0; i < users.size(); ++i) w.w[users[i]] = cell_res.state.w.w[i];
      iters += cell_res.state.iterations;
    }
    res.trace.push_back({round + 1, wsum_ee(design, w, eval_env).value, 0, 0, 0.0});
  }

  const ChannelSet& tc = truth ? *truth : design;
  res.net = network_ee(tc, w, eval_env);
  res.wsum = wsum_ee(tc, w, eval_env);
  res.state.w = std::move(w);
  res.state.iterations = static_cast<int>(iters);
  res.state.backhaul_scalars = 0;
  res.state.ota_iterations = 0;
  res.converged = true;
  return res;
}

}  // namespace

RunResult run_mmse_power_allocation(const ChannelSet& design, const ChannelSet* truth,
                                    const ScenarioConfig& cfg, const PowerModelParams& params,
                                    ObjectiveKind tag, const SolverConfig& scfg,
                                    const BaselineOptions& opts) {
  SystemEnv env = make_env(cfg, params, opts.q_mmse);
  const std::vector<cvec> dirs = mmse_directions(design, env);
  if (tag == ObjectiveKind::NetworkEE) {
    Problem prob;
    prob.design = &design;
    prob.truth = truth;
    prob.env = env;
    prob.fixed_directions = dirs;
    SolverConfig c = scfg;
    c.objective = ObjectiveKind::NetworkEE;
    c.mode = SolveMode::Centralized;
    return solve(prob, c);
  }
  return gauss_seidel_percell(design, truth, env, &dirs, scfg, opts.gauss_seidel_rounds);
}

RunResult run_uncoordinated(const ChannelSet& design, const ChannelSet* truth,
                            const ScenarioConfig& cfg, const PowerModelParams& params,
                            const SolverConfig& scfg, const BaselineOptions& opts) {
  const SystemEnv env = make_uncoordinated_env(cfg, params);
  return gauss_seidel_percell(design, truth, env, nullptr, scfg, opts.gauss_seidel_rounds);
}

RunResult run_orthogonal(const ChannelSet& design, const ChannelSet* truth,
                         const ScenarioConfig& cfg, const PowerModelParams& params,
                         const SolverConfig& scfg, const BaselineOptions& opts) {
  (void)opts;
  const SystemEnv env = make_orthogonal_env(cfg, params);
  SolverConfig sub_cfg = scfg;
  sub_cfg.objective = ObjectiveKind::WeightedSumEE;
  sub_cfg.mode = SolveMode::Centralized;
  sub_cfg.init_seed = 0;

  RunResult res;
  BeamformerSet w = BeamformerSet::zeros(design);
  long long iters = 0;
  for (int b = 0; b < design.num_bs(); ++b) {
    const auto& users = design.cell_users[b];
    if (users.empty()) continue;
    ChannelSet cell = extract_cell(design, b);
    Problem prob;
    prob.design = &cell;
    prob.env = sub_env(env, b, {});
    RunResult cell_res = solve(prob, sub_cfg);
    for (std::size_t i = 0; i < users.size(); ++i) w.w[users[i]] = cell_res.state.w.w[i];
    iters += cell_res.state.iterations;
  }

  // Aggregate per-cell isolated metrics: each cell lives in its own sub-band,
  // so the network evaluation has no cross-cell terms.
  const ChannelSet& tc = truth ? *truth : design;
  EeResult agg;
  agg.rate.alpha_hz = env.alpha_hz;
  agg.rate.gamma.assign(tc.num_users(), 0.0);
  agg.rate.user_nats.assign(tc.num_users(), 0.0);
  agg.rate.bs_nats.assign(tc.num_bs(), 0.0);
  std::vector<double> tx(tc.num_bs(), 0.0), rate_gbits(tc.num_bs(), 0.0);
  for (int b = 0; b < tc.num_bs(); ++b) {
    ChannelSet cell = extract_cell(tc, b);
    BeamformerSet cell_w;
    for (int k : tc.cell_users[b]) cell_w.w.push_back(w.w[k]);
    const SystemEnv cell_env = sub_env(env, b, {});
    const RateVector rv = rates(cell, cell_w, cell_env);
    for (std::size_t i = 0; i < tc.cell_users[b].size(); ++i) {
      const int k = tc.cell_users[b][i];
      agg.rate.gamma[k] = rv.gamma[i];
      agg.rate.user_nats[k] = rv.user_nats[i];
      agg.rate.bs_nats[b] += rv.user_nats[i];
    }
    tx[b] = cell_w.per_bs_tx_power(cell)[0];
    rate_gbits[b] = nats_to_gbits(agg.rate.bs_nats[b]);
  }
  agg.power = total_power(tx, rate_gbits, env.p_cp_w, env.power);
  agg.per_cell_ee.resize(tc.num_bs());
  double bits = 0.0;
  for (int b = 0; b < tc.num_bs(); ++b) {
    bits += agg.rate.bs_nats[b] * kNatsToBits;
    agg.per_cell_ee[b] = agg.rate.bs_nats[b] * kNatsToBits / agg.power.per_bs_w[b];
  }
  agg.value = bits / agg.power.total_w;

  res.net = agg;
  res.wsum = agg;
  res.wsum.value = 0.0;
  for (int b = 0; b < tc.num_bs(); ++b)
    res.wsum.value += env.weights[b] * agg.per_cell_ee[b];
  res.state.w = std::move(w);
  res.state.iterations = static_cast<int>(iters);
  res.converged = true;
  return res;
}

RunResult run_rate_agnostic(const ChannelSet& design, const ChannelSet* truth,
                            const SystemEnv& env, SolverConfig scfg) {
  scfg.rate_power_aware = false;
  Problem prob;
  prob.design = &design;
  prob.truth = truth;
  prob.env = env;
  return solve(prob, scfg);
}

}  // namespace eebeam
