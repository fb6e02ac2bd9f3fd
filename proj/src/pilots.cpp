#include "eebeam/pilots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eebeam {

GroupSizes group_sizes(int k_total, int tau) {
  if (tau < 1 || tau > k_total)
    throw std::invalid_argument("pilots: tau must be in [1, total users]");
  GroupSizes gs;
  gs.m_max = (k_total + tau - 1) / tau;
  gs.m_min = gs.m_max - 1;
  gs.x_max = k_total - gs.m_min * tau;
  gs.x_min = tau * gs.m_max - k_total;
  return gs;
}

PilotContext make_pilot_context(const Eigen::MatrixXd& path_gain,
                                const std::vector<int>& serving,
                                const ScenarioConfig& cfg, const PowerModelParams& params,
                                int tau_ul) {
  ScenarioConfig at_tau = cfg;
  at_tau.tau_ul = tau_ul;
  at_tau.validate();
  params.validate();

  PilotContext ctx;
  ctx.path_gain = &path_gain;
  ctx.serving = &serving;
  ctx.total_users = static_cast<int>(serving.size());
  ctx.cell_size.assign(path_gain.rows(), 0);
  for (int b : serving) ++ctx.cell_size[b];
  ctx.p_max_w.assign(path_gain.rows(), cfg.tx_power_w());
  ctx.alpha_hz = at_tau.effective_bandwidth_hz();
  ctx.noise_w = cfg.noise_power_w();
  ctx.eta = params.eta;
  ctx.p_rd = params.p_rd;
  ctx.m_exponent = params.m_exponent;

  PowerModelParams charged = params;
  charged.p_lp_c_w = params.iteration_budget_q *
                     iteration_power_w(cfg.antennas, ctx.total_users, cfg.users_per_cell,
                                       params, cfg.bandwidth_hz, cfg.coherence_uses);
  ctx.p_cp_total_w = 0.0;
  for (int b = 0; b < static_cast<int>(path_gain.rows()); ++b)
    ctx.p_cp_total_w += circuit_power_w(cfg.antennas, ctx.cell_size[b], charged,
                                        at_tau.overhead_fraction(), cfg.bandwidth_hz);
  return ctx;
}

double group_metric(const std::vector<int>& group, const PilotContext& ctx) {
  if (group.empty()) throw std::domain_error("group_metric: empty group");
  const auto& zeta = *ctx.path_gain;
  const auto& serving = *ctx.serving;

  double rate_bits = 0.0, tx_w = 0.0, rd_w = 0.0;
  for (int k : group) {
    const int bk = serving[k];
    const double p_share_k = ctx.p_max_w[bk] / ctx.cell_size[bk];
    double interference = 0.0;
    for (int j : group) {
      if (j == k) continue;
      const int bj = serving[j];
      interference += ctx.p_max_w[bj] / ctx.cell_size[bj] * zeta(bj, k);
    }
    const double rate_nats =
        ctx.alpha_hz * std::log1p(p_share_k * zeta(bk, k) / (interference + ctx.noise_w));
    rate_bits += rate_nats * kNatsToBits;
    tx_w += p_share_k / ctx.eta;
    rd_w += ctx.p_rd * delta(nats_to_gbits(rate_nats), ctx.m_exponent);
  }
  const double circuit_share =
      static_cast<double>(group.size()) * ctx.p_cp_total_w / ctx.total_users;
  return rate_bits / (tx_w + circuit_share + rd_w);
}

namespace {

std::size_t combination_count(std::size_t n, std::size_t m, std::size_t cap) {
  if (m > n) return 0;
  double c = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (c > static_cast<double>(cap) * 2.0) return cap + 1;
  }
  return static_cast<std::size_t>(c + 0.5);
}

struct Candidate {
  std::vector<int> users;  // sorted ascending
  double score;
};

// Phase step shared by both allocators: enumerate size-m groups over the pool,
// score, sort (score desc, user ids lex asc for determinism), take `count`
// disjoint groups.
template <typename Score>
std::vector<std::vector<int>> pick_groups(const std::vector<int>& pool, int m, int count,
                                          std::size_t cap, Score&& score) {
  if (count == 0 || m == 0) return {};
  if (combination_count(pool.size(), m, cap) > cap)
    throw std::runtime_error(
        "pilots: candidate group count exceeds the enumeration cap; reduce the instance");

  std::vector<Candidate> cands;
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  const int n = static_cast<int>(pool.size());
  while (true) {
    std::vector<int> group(m);
    for (int i = 0; i < m; ++i) group[i] = pool[idx[i]];
    cands.push_back({group, score(group)});
    int i = m - 1;
    while (i >= 0 && idx[i] == n - m + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.users < b.users;
  });

  std::vector<std::vector<int>> chosen;
  std::vector<char> used(pool.empty() ? 0 : *std::max_element(pool.begin(), pool.end()) + 1, 0);
  for (const auto& cand : cands) {
    if (static_cast<int>(chosen.size()) == count) break;
    bool free = true;
    for (int k : cand.users) free = free && !used[k];
    if (!free) continue;
    for (int k : cand.users) used[k] = 1;
    chosen.push_back(cand.users);
  }
  return chosen;
}

template <typename Score>
PilotAllocation allocate_two_phase(int k_total, int tau, std::size_t cap, Score&& score) {
  const GroupSizes gs = group_sizes(k_total, tau);
  std::vector<int> pool(k_total);
  for (int k = 0; k < k_total; ++k) pool[k] = k;

  PilotAllocation alloc;
  alloc.group_of.assign(k_total, -1);
  auto commit = [&](const std::vector<int>& group) {
    for (int k : group) alloc.group_of[k] = static_cast<int>(alloc.groups.size());
    alloc.groups.push_back(group);
  };

  for (const auto& g : pick_groups(pool, gs.m_min, gs.x_min, cap, score)) commit(g);
  std::vector<int> remaining;
  for (int k = 0; k < k_total; ++k)
    if (alloc.group_of[k] < 0) remaining.push_back(k);
  for (const auto& g : pick_groups(remaining, gs.m_max, gs.x_max, cap, score)) commit(g);

  alloc.validate_partition(k_total);
  return alloc;
}

}  // namespace

PilotAllocation allocate(const Eigen::MatrixXd& path_gain, const std::vector<int>& serving,
                         int tau, const ScenarioConfig& cfg, const PowerModelParams& params,
                         std::size_t candidate_cap) {
  const int k_total = static_cast<int>(serving.size());
  if (tau < cfg.users_per_cell)
    throw std::invalid_argument("pilots: tau below the largest cell size");
  const PilotContext ctx = make_pilot_context(path_gain, serving, cfg, params, tau);
  return allocate_two_phase(k_total, tau, candidate_cap,
                            [&](const std::vector<int>& g) { return group_metric(g, ctx); });
}

PilotAllocation allocate_greedy(const Eigen::MatrixXd& path_gain,
                                const std::vector<int>& serving, int tau,
                                const ScenarioConfig& cfg, std::size_t candidate_cap) {
  const int k_total = static_cast<int>(serving.size());
  if (tau < cfg.users_per_cell)
    throw std::invalid_argument("pilots: tau below the largest cell size");
  auto sum_gain = [&](const std::vector<int>& g) {
    double s = 0.0;
    for (int k : g) s += path_gain(serving[k], k);
    return s;
  };
  return allocate_two_phase(k_total, tau, candidate_cap, sum_gain);
}

}  // namespace eebeam
