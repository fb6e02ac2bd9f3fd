#pragma once

#include <random>
#include <vector>

#include "eebeam/common.hpp"

namespace eebeam {

struct ScenarioConfig {
  int cells = 7;          ///< B
  int antennas = 4;       ///< N_b
  int users_per_cell = 2; ///< L
  double inter_bs_distance_m = 120.0;
  double cell_radius_m = 60.0;
  double bandwidth_hz = 20e6;  ///< W
  int coherence_uses = 100;    ///< U
  int tau_ul = -1;  ///< uplink pilot count; -1 means |K| (orthogonal)
  int tau_dl = -1;  ///< downlink pilot count; -1 means |K|
  double noise_power_dbm = -98.0;  ///< N0
  double tx_power_dbm = 27.0;      ///< per-BS budget P_b
  double shadow_std_db = 8.0;
  std::uint64_t seed = 1;

  int total_users() const { return cells * users_per_cell; }
  int tau_ul_eff() const { return tau_ul < 0 ? total_users() : tau_ul; }
  int tau_dl_eff() const { return tau_dl < 0 ? total_users() : tau_dl; }
  double noise_power_w() const { return dbm_to_watt(noise_power_dbm); }
  double tx_power_w() const { return dbm_to_watt(tx_power_dbm); }
  /// 1 - (tau_ul + tau_dl)/U
  double overhead_fraction() const {
    return 1.0 - static_cast<double>(tau_ul_eff() + tau_dl_eff()) / coherence_uses;
  }
  /// alpha = overhead_fraction * W
  double effective_bandwidth_hz() const { return overhead_fraction() * bandwidth_hz; }

  void validate() const;
};

/// BS positions plus the wrap-around displacement set (nearest-image metric).
struct Layout {
  std::vector<Eigen::Vector2d> bs_positions;
  std::vector<Eigen::Vector2d> wrap_offsets;  ///< includes the zero offset

  double wrap_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
};

/// 7 hexagonal cells with wrap-around, or a single cell. Other counts are
/// rejected: the wrap-around displacement set only exists for the 7-cell cluster.
Layout build_layout(const ScenarioConfig& cfg);

struct UserDrop {
  std::vector<Eigen::Vector2d> positions;  ///< per user
  std::vector<int> serving;                ///< serving BS index per user
};

/// Places L users per cell on the serving cell's edge circle at uniform angle.
UserDrop drop_users(const Layout& layout, const ScenarioConfig& cfg, std::mt19937_64& rng);

/// 35 + 30*log10(d) + shadow, in dB. d in meters, > 0.
double path_gain_db(double distance_m, double shadow_db);

/// Linear path gains zeta[b][k] with per-link log-normal shadowing, using
/// nearest-image distances. Shadowing is drawn once per drop.
Eigen::MatrixXd path_gains(const Layout& layout, const UserDrop& drop,
                           const ScenarioConfig& cfg, std::mt19937_64& rng);

struct ChannelSet {
  std::vector<cmat> h;  ///< h[b] is N x K; column k is the channel from BS b to user k
  Eigen::MatrixXd path_gain;              ///< B x K linear gains
  std::vector<int> serving;               ///< b_k per user
  std::vector<std::vector<int>> cell_users;  ///< user ids per BS

  int num_bs() const { return static_cast<int>(h.size()); }
  int num_users() const { return static_cast<int>(serving.size()); }
  int antennas() const { return h.empty() ? 0 : static_cast<int>(h[0].rows()); }
};

/// Rayleigh fading: entries of h[b].col(k) are i.i.d. CN(0, zeta[b][k]).
ChannelSet generate_channels(const UserDrop& drop, const Eigen::MatrixXd& gains,
                             const ScenarioConfig& cfg, std::mt19937_64& rng);

/// Pilot-resource grouping; groups partition the user set.
struct PilotAllocation {
  std::vector<std::vector<int>> groups;  ///< user ids per pilot resource
  std::vector<int> group_of;             ///< resource index per user, -1 if unassigned

  static PilotAllocation orthogonal(int num_users);
  void validate_partition(int num_users) const;
};

struct ObservedChannelSet {
  ChannelSet channels;          ///< h_tilde in place of h
  std::vector<int> pilot_group; ///< resource index per user
};

/// h_tilde[b][k] = h[b][k] + sum over other users sharing k's pilot resource.
ObservedChannelSet contaminate(const ChannelSet& channels, const PilotAllocation& alloc);

/// Layout + drop + gains + channels from one config; RNG streams are split
/// per purpose so the result is a pure function of (cfg, cfg.seed).
struct Scenario {
  Layout layout;
  UserDrop drop;
  ChannelSet channels;
};

Scenario make_scenario(const ScenarioConfig& cfg);

}  // namespace eebeam
