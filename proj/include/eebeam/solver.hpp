#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eebeam/metrics.hpp"

namespace eebeam {

enum class ObjectiveKind { WeightedSumEE, NetworkEE };

/// Centralized: successive convex approximation on the quadratic-over-linear
/// tangent bounds, each subproblem solved to convergence through its KKT
/// system in closed form (the centralized algorithm; monotone objective).
/// Decentralized: the single combined loop of closed-form updates driven by
/// MMSE receiver exchange (per-iteration signaling, step size rho).
/// CentralizedKkt: the decentralized update engine run nested - receivers and
/// linearization frozen while the inner KKT loop converges.
enum class SolveMode { Centralized, Decentralized, CentralizedKkt };

struct SolverConfig {
  ObjectiveKind objective = ObjectiveKind::WeightedSumEE;
  SolveMode mode = SolveMode::Decentralized;
  double rho = 0.15;        ///< dual step size, [0,1]
  double xi = 1e-4;         ///< stop when relative objective change over the stall window is below this
  int stall_window = 5;
  int max_iterations = 200; ///< combined iterations (decentralized) / outer iterations (centralized)
  int ota_budget = 100000;  ///< cap on over-the-air receiver refreshes (decentralized)
  int receiver_period = 1;  ///< s: beamformer updates per receiver refresh
  double inner_xi = 1e-6;   ///< centralized modes: inner KKT loop stop rule
  int max_inner_iterations = 600;
  double inner_damping = 0.35;  ///< dual step inside the tangent subproblem solve
  double bisection_rel_tol = 1e-12;
  double bracket_growth = 2.0;
  bool rate_power_aware = true;  ///< false: optimize with P_RD = 0, report with the true value
  std::uint64_t init_seed = 0;   ///< 0: MRT initialization; else random feasible directions
  /// Centralized mode with m > 1 (or any rate-aware solve): first solve the
  /// rate-independent problem, then continue from its solution with the full
  /// model. The continuation leg is monotone in the true objective, so the
  /// result never falls below the rate-agnostic solution.
  bool prd_continuation = true;
};

/// One solve instance. `design` is what the optimizer sees (possibly
/// pilot-contaminated); `truth` (defaulting to design) is what the final
/// metrics are evaluated on. `fixed_directions`, when nonempty, restricts the
/// beamformer update to per-user power allocation along the given unit vectors.
struct Problem {
  const ChannelSet* design = nullptr;
  const ChannelSet* truth = nullptr;
  SystemEnv env;
  std::vector<cvec> fixed_directions;
  const BeamformerSet* warm_start = nullptr;  ///< overrides the MRT/random initialization

  const ChannelSet& truth_channels() const { return truth ? *truth : *design; }
};

struct SolverState {
  BeamformerSet w;
  std::vector<cplx> u;          ///< scalar receivers
  std::vector<double> gamma;    ///< per-user SINR auxiliaries
  std::vector<double> beta;     ///< per-user interference-plus-noise (set at expansion refreshes)
  std::vector<double> r, z, t;  ///< per-BS sqrt-rate, power, EE auxiliaries
  std::vector<double> d;        ///< per-user duals
  std::vector<double> f, c, s;  ///< per-BS duals
  std::vector<double> gamma_prev, r_prev, z_prev;  ///< linearization snapshot
  double p = 0.0, p_prev = 0.0;                    ///< network power (NetworkEE only)

  cmat cross;  ///< cache: cross(j,k) = h_{b_j,k}^H w_j for the design channels

  /// Tangent-SCA expansion cache (Centralized mode): v_k = h_k^H w0_k / beta0_k
  /// and psi_k = |h_k^H w0_k|^2 / beta0_k^2 at the current expansion point.
  std::vector<cplx> tangent_v;
  std::vector<double> tangent_psi;

  std::vector<bool> degenerate;    ///< users with zero serving channel
  std::vector<bool> gamma_pinned;  ///< users whose MSE tangent admits no gamma >= 0
  int iterations = 0;
  int ota_iterations = 0;
  long long backhaul_scalars = 0;
  bool used_ridge_fallback = false;
};

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;  ///< design-channel objective (internal P_RD)
  int ota = 0;
  long long backhaul = 0;
  double max_power_slack = 0.0;  ///< max_b (tx_b - P_b)/P_b
};

struct RunResult {
  SolverState state;
  std::vector<TraceRow> trace;
  EeResult net;   ///< evaluated on truth channels with the true power model
  EeResult wsum;
  bool converged = false;
  bool diverged = false;
  int stabilized_iteration = -1;  ///< first iteration at which the xi-rule held
  std::string note;
};

SolverState init_state(const Problem& prob, const SolverConfig& cfg);

/// Closed-form per-BS beamformer solve with power-constraint bisection.
void update_beamformers(SolverState& st, const Problem& prob, const SolverConfig& cfg);

/// MMSE receiver refresh from the current beamformers.
void update_receivers(SolverState& st, const Problem& prob, const SolverConfig& cfg);

/// (gamma, r, z, t) updates against the frozen linearization snapshot.
void update_locals(SolverState& st, const Problem& prob, const SolverConfig& cfg);

/// (f, d, c) updates; d moves by step rho toward its fixed point.
void update_duals(SolverState& st, const Problem& prob, const SolverConfig& cfg);

/// Recomputes (gamma, r, z) exactly from the current beamformers/receivers and
/// freezes them as the new linearization snapshot (used between centralized
/// outer steps and at initialization).
void refresh_expansion(SolverState& st, const Problem& prob, const SolverConfig& cfg);

/// Design-channel objective with the solver-internal P_RD.
double objective(const SolverState& st, const Problem& prob, const SolverConfig& cfg);

RunResult solve(const Problem& prob, const SolverConfig& cfg);

struct KktDiagnostics {
  double max_stationarity_rel = 0.0;
  double max_comp_slack = 0.0;   ///< max_b s_b * (tx_b - P_b), signed
  double max_power_slack = 0.0;  ///< max_b (tx_b - P_b)/P_b
};

KktDiagnostics kkt_residuals(const SolverState& st, const Problem& prob, const SolverConfig& cfg);

}  // namespace eebeam
