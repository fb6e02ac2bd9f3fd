#include "eebeam/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eebeam {

void ScenarioConfig::validate() const {
  if (cells < 1) throw std::invalid_argument("scenario: cells must be >= 1");
  if (antennas < 1) throw std::invalid_argument("scenario: antennas must be >= 1");
  if (users_per_cell < 0) throw std::invalid_argument("scenario: users_per_cell must be >= 0");
  if (bandwidth_hz <= 0) throw std::invalid_argument("scenario: bandwidth must be positive");
  if (inter_bs_distance_m <= 0 || cell_radius_m <= 0)
    throw std::invalid_argument("scenario: distances must be positive");
  const int per_cell_max = users_per_cell;
  if (tau_ul_eff() < per_cell_max || tau_dl_eff() < per_cell_max)
    throw std::invalid_argument("scenario: pilot counts must be >= users per cell");
  if (tau_ul_eff() + tau_dl_eff() >= coherence_uses)
    throw std::invalid_argument("scenario: tau_ul + tau_dl must be < coherence uses U");
}

double Layout::wrap_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& off : wrap_offsets) best = std::min(best, (a - b + off).norm());
  return best;
}

Layout build_layout(const ScenarioConfig& cfg) {
  cfg.validate();
  Layout layout;
  if (cfg.cells == 1) {
    layout.bs_positions.emplace_back(0.0, 0.0);
    layout.wrap_offsets.emplace_back(0.0, 0.0);
    return layout;
  }
  if (cfg.cells != 7)
    throw std::invalid_argument("scenario: wrap-around layout supports 7 cells (or 1)");

  const double d = cfg.inter_bs_distance_m;
  layout.bs_positions.emplace_back(0.0, 0.0);
  for (int i = 0; i < 6; ++i) {
    const double ang = i * std::numbers::pi / 3.0;
    layout.bs_positions.emplace_back(d * std::cos(ang), d * std::sin(ang));
  }
  // Cluster translation of the 7-cell tiling, length sqrt(7)*d; its six
  // 60-degree rotations plus zero form the nearest-image displacement set.
  const Eigen::Vector2d t0(2.5 * d, std::sqrt(3.0) / 2.0 * d);
  layout.wrap_offsets.emplace_back(0.0, 0.0);
  for (int i = 0; i < 6; ++i) {
    const double ang = i * std::numbers::pi / 3.0;
    const double c = std::cos(ang), s = std::sin(ang);
    layout.wrap_offsets.emplace_back(c * t0.x() - s * t0.y(), s * t0.x() + c * t0.y());
  }
  return layout;
}

UserDrop drop_users(const Layout& layout, const ScenarioConfig& cfg, std::mt19937_64& rng) {
  UserDrop drop;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int b = 0; b < static_cast<int>(layout.bs_positions.size()); ++b) {
    for (int l = 0; l < cfg.users_per_cell; ++l) {
      const double a = angle(rng);
      drop.positions.emplace_back(layout.bs_positions[b].x() + cfg.cell_radius_m * std::cos(a),
                                  layout.bs_positions[b].y() + cfg.cell_radius_m * std::sin(a));
      drop.serving.push_back(b);
    }
  }
  return drop;
}

double path_gain_db(double distance_m, double shadow_db) {
  if (distance_m <= 0.0) throw std::domain_error("path_gain_db: distance must be positive");
  return 35.0 + 30.0 * std::log10(distance_m) + shadow_db;
}

Eigen::MatrixXd path_gains(const Layout& layout, const UserDrop& drop,
                           const ScenarioConfig& cfg, std::mt19937_64& rng) {
  const int num_bs = static_cast<int>(layout.bs_positions.size());
  const int num_users = static_cast<int>(drop.positions.size());
  Eigen::MatrixXd zeta(num_bs, num_users);
  std::normal_distribution<double> shadow(0.0, cfg.shadow_std_db);
  for (int b = 0; b < num_bs; ++b) {
    for (int k = 0; k < num_users; ++k) {
      const double dist = layout.wrap_distance(layout.bs_positions[b], drop.positions[k]);
      const double loss_db = path_gain_db(dist, shadow(rng));
      zeta(b, k) = db_to_linear(-loss_db);
    }
  }
  return zeta;
}

ChannelSet generate_channels(const UserDrop& drop, const Eigen::MatrixXd& gains,
                             const ScenarioConfig& cfg, std::mt19937_64& rng) {
  ChannelSet cs;
  const int num_bs = static_cast<int>(gains.rows());
  const int num_users = static_cast<int>(drop.positions.size());
  cs.path_gain = gains;
  cs.serving = drop.serving;
  cs.cell_users.assign(num_bs, {});
  for (int k = 0; k < num_users; ++k) cs.cell_users[drop.serving[k]].push_back(k);

  std::normal_distribution<double> gauss(0.0, 1.0);
  cs.h.resize(num_bs);
  for (int b = 0; b < num_bs; ++b) {
    cs.h[b].resize(cfg.antennas, num_users);
    for (int k = 0; k < num_users; ++k) {
      const double sigma = std::sqrt(gains(b, k) / 2.0);
      for (int n = 0; n < cfg.antennas; ++n)
        cs.h[b](n, k) = cplx(sigma * gauss(rng), sigma * gauss(rng));
    }
  }
  return cs;
}

PilotAllocation PilotAllocation::orthogonal(int num_users) {
  PilotAllocation alloc;
  alloc.groups.resize(num_users);
  alloc.group_of.resize(num_users);
  for (int k = 0; k < num_users; ++k) {
    alloc.groups[k] = {k};
    alloc.group_of[k] = k;
  }
  return alloc;
}

void PilotAllocation::validate_partition(int num_users) const {
  std::vector<int> seen(num_users, 0);
  for (const auto& g : groups)
    for (int k : g) {
      if (k < 0 || k >= num_users) throw std::invalid_argument("pilot allocation: bad user id");
      ++seen[k];
    }
  for (int k = 0; k < num_users; ++k)
    if (seen[k] != 1) throw std::invalid_argument("pilot allocation: not a partition of users");
}

ObservedChannelSet contaminate(const ChannelSet& channels, const PilotAllocation& alloc) {
  const int num_users = channels.num_users();
  if (static_cast<int>(alloc.group_of.size()) != num_users)
    throw std::invalid_argument("contaminate: allocation does not cover all users");
  for (int k = 0; k < num_users; ++k)
    if (alloc.group_of[k] < 0 || alloc.group_of[k] >= static_cast<int>(alloc.groups.size()))
      throw std::invalid_argument("contaminate: user missing from allocation");

  ObservedChannelSet out;
  out.channels = channels;
  out.pilot_group = alloc.group_of;
  for (int b = 0; b < channels.num_bs(); ++b) {
    for (int k = 0; k < num_users; ++k) {
      for (int j : alloc.groups[alloc.group_of[k]]) {
        if (j == k) continue;
        out.channels.h[b].col(k) += channels.h[b].col(j);
      }
    }
  }
  return out;
}

Scenario make_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.layout = build_layout(cfg);
  auto rng_drop = make_rng(derive_seed(cfg.seed, {1}));
  sc.drop = drop_users(sc.layout, cfg, rng_drop);
  auto rng_shadow = make_rng(derive_seed(cfg.seed, {2}));
  const Eigen::MatrixXd gains = path_gains(sc.layout, sc.drop, cfg, rng_shadow);
  auto rng_fading = make_rng(derive_seed(cfg.seed, {3}));
  sc.channels = generate_channels(sc.drop, gains, cfg, rng_fading);
  return sc;
}

}  // namespace eebeam
