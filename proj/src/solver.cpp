#include "eebeam/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eebeam {

namespace {

constexpr double kRateFloor = 1e-12;

double internal_p_rd(const Problem& prob, const SolverConfig& cfg) {
  return cfg.rate_power_aware ? prob.env.power.p_rd : 0.0;
}

// P_RD * delta(rate) with rate = r^2 in nats/s, converted to Gbit/s.
double rate_power_w(double r, double p_rd, double m) {
  if (p_rd == 0.0) return 0.0;
  return p_rd * delta(nats_to_gbits(r * r), m);
}

// d/dr of rate_power_w.
double rate_power_deriv(double r, double p_rd, double m) {
  if (p_rd == 0.0 || r == 0.0) return 0.0;
  return p_rd * delta_prime(nats_to_gbits(r * r), m) * 2.0 * kNatsToGbits * r;
}

void recompute_cross(SolverState& st, const ChannelSet& cs) {
  const int num_users = cs.num_users();
  for (int j = 0; j < num_users; ++j) {
    const auto& hbj = cs.h[cs.serving[j]];
    for (int k = 0; k < num_users; ++k) st.cross(j, k) = hbj.col(k).dot(st.w.w[j]);
  }
}

double denom(const SolverState& st, const SystemEnv& env, int k) {
  double sum = 0.0;
  for (int j = 0; j < st.cross.rows(); ++j) sum += std::norm(st.cross(j, k));
  return sum + env.noise_w + env.extra(k);
}

void set_mmse_receivers(SolverState& st, const SystemEnv& env) {
  for (int k = 0; k < st.cross.cols(); ++k) st.u[k] = st.cross(k, k) / denom(st, env, k);
}

void freeze_snapshot(SolverState& st) {
  st.gamma_prev = st.gamma;
  st.r_prev = st.r;
  st.z_prev = st.z;
  st.p_prev = st.p;
}

double surrogate(const SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  double sum = 0.0;
  for (std::size_t b = 0; b < st.t.size(); ++b)
    sum += (cfg.objective == ObjectiveKind::NetworkEE ? 1.0 : prob.env.weights[b]) * st.t[b];
  return sum;
}

// Max relative spread of the trailing window; the stopping rule compares this
// against xi.
bool stalled(const std::vector<double>& hist, double tol, int window) {
  if (static_cast<int>(hist.size()) < window + 1) return false;
  double lo = hist.back(), hi = hist.back();
  for (int i = 0; i <= window; ++i) {
    const double v = hist[hist.size() - 1 - i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo <= tol * std::max(std::abs(hist.back()), 1e-300);
}

double max_power_slack(const SolverState& st, const Problem& prob) {
  const auto tx = st.w.per_bs_tx_power(*prob.design);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < tx.size(); ++b)
    worst = std::max(worst, (tx[b] - prob.env.p_max_w[b]) / prob.env.p_max_w[b]);
  return worst;
}

void validate_problem(const Problem& prob) {
  if (!prob.design) throw std::invalid_argument("solver: missing design channels");
  const int num_bs = prob.design->num_bs();
  const int num_users = prob.design->num_users();
  if (static_cast<int>(prob.env.p_max_w.size()) != num_bs ||
      static_cast<int>(prob.env.p_cp_w.size()) != num_bs ||
      static_cast<int>(prob.env.weights.size()) != num_bs)
    throw std::invalid_argument("solver: env per-BS vectors must match the cell count");
  if (!prob.fixed_directions.empty() &&
      static_cast<int>(prob.fixed_directions.size()) != num_users)
    throw std::invalid_argument("solver: one fixed direction per user required");
}

// Chooses s_b for one BS: zero when the unconstrained solve already meets the
// budget, otherwise safeguarded bisection. Ends on the feasible side so the
// emitted beams never exceed P_b. eval(s) must recompute the candidate beams
// and return their total power (strictly decreasing in s).
template <typename Eval>
void bisect_power(SolverState& st, const SolverConfig& cfg, int b, double p_max, Eval&& eval) {
  double pw = eval(0.0);
  if (pw <= p_max) {
    st.s[b] = 0.0;
    return;
  }
  double lo = 0.0, hi = 1.0;
  double pw_hi = eval(hi);
  while (pw_hi > p_max && hi < 1e100) {
    lo = hi;
    hi *= cfg.bracket_growth;
    pw_hi = eval(hi);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = eval(mid);
    if (pm > p_max) {
      lo = mid;
    } else {
      hi = mid;
      if (p_max - pm <= cfg.bisection_rel_tol * p_max) break;
    }
  }
  st.s[b] = hi;
  eval(hi);
}

}  // namespace

SolverState init_state(const Problem& prob, const SolverConfig& cfg) {
  validate_problem(prob);
  const ChannelSet& cs = *prob.design;
  const int num_bs = cs.num_bs();
  const int num_users = cs.num_users();
  const int n = cs.antennas();

  SolverState st;
  st.w.w.assign(num_users, cvec::Zero(n));
  st.u.assign(num_users, cplx(0, 0));
  st.gamma.assign(num_users, 0.0);
  st.beta.assign(num_users, 0.0);
  st.d.assign(num_users, 0.0);
  st.r.assign(num_bs, 0.0);
  st.z.assign(num_bs, 0.0);
  st.t.assign(num_bs, 0.0);
  st.f.assign(num_bs, 0.0);
  st.c.assign(num_bs, 0.0);
  st.s.assign(num_bs, 0.0);
  st.degenerate.assign(num_users, false);
  st.gamma_pinned.assign(num_users, false);
  st.tangent_v.assign(num_users, cplx(0, 0));
  st.tangent_psi.assign(num_users, 0.0);
  st.cross.resize(num_users, num_users);

  std::mt19937_64 rng(cfg.init_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < num_users; ++k) {
    const int b = cs.serving[k];
    if (cs.h[b].col(k).norm() == 0.0) {
      st.degenerate[k] = true;  // served with a zero beamformer
      continue;
    }
    if (prob.warm_start) {
      st.w.w[k] = prob.warm_start->w[k];
      continue;
    }
    const double per_user = prob.env.p_max_w[b] / std::max<std::size_t>(1, cs.cell_users[b].size());
    cvec dir;
    if (!prob.fixed_directions.empty()) {
      dir = prob.fixed_directions[k];
    } else if (cfg.init_seed != 0) {
      dir.resize(n);
      for (int i = 0; i < n; ++i) dir(i) = cplx(gauss(rng), gauss(rng));
    } else {
      dir = cs.h[b].col(k);  // MRT
    }
    const double nrm = dir.norm();
    if (nrm == 0.0) {
      st.degenerate[k] = true;
      continue;
    }
    st.w.w[k] = std::sqrt(per_user) / nrm * dir;
  }

  recompute_cross(st, cs);
  set_mmse_receivers(st, prob.env);
  refresh_expansion(st, prob, cfg);

  // Duals consistent with the initial linearization: f from the stationarity
  // quotient at the initial point, d from its converged relation.
  const double p_rd = internal_p_rd(prob, cfg);
  const double m = prob.env.power.m_exponent;
  for (int b = 0; b < num_bs; ++b) {
    const double scale = cfg.objective == ObjectiveKind::NetworkEE ? st.p : st.z[b];
    const double a_b = cfg.objective == ObjectiveKind::NetworkEE ? 1.0 : prob.env.weights[b];
    const double ratio = st.r[b] / scale;
    const double num = 2.0 * ratio * a_b - st.c[b] * rate_power_deriv(st.r[b], p_rd, m);
    st.f[b] = std::min(std::max(0.0, num / (2.0 * std::max(st.r[b], kRateFloor))), a_b / scale);
  }
  for (int k = 0; k < num_users; ++k) {
    if (st.degenerate[k]) continue;
    st.d[k] = st.f[cs.serving[k]] * prob.env.alpha_hz * (1.0 + st.gamma[k]);
  }
  return st;
}

void update_beamformers(SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  const int num_bs = cs.num_bs();
  const int num_users = cs.num_users();
  const int n = cs.antennas();
  const bool fixed = !prob.fixed_directions.empty();

  for (int b = 0; b < num_bs; ++b) {
    const auto& users = cs.cell_users[b];
    if (users.empty()) {
      st.s[b] = 0.0;
      continue;
    }
    const double base = st.c[b] / prob.env.power.eta;
    const double p_max = prob.env.p_max_w[b];

    std::vector<cvec> cand(users.size());
    double cand_power = 0.0;

    if (fixed) {
      // Power allocation along frozen unit directions: the per-user solve
      // reduces to a scalar quotient.
      std::vector<double> quad(users.size(), 0.0);  // dir^H M_b dir
      std::vector<double> lin(users.size(), 0.0);   // d_k Re(conj(u_k) h^H dir)
      for (std::size_t i = 0; i < users.size(); ++i) {
        const int k = users[i];
        if (st.degenerate[k]) continue;
        const cvec& dir = prob.fixed_directions[k];
        for (int j = 0; j < num_users; ++j) {
          const double coef = st.d[j] * std::norm(st.u[j]);
          if (coef > 0.0) quad[i] += coef * std::norm(cs.h[b].col(j).dot(dir));
        }
        lin[i] = st.d[k] * std::real(std::conj(st.u[k]) * cs.h[b].col(k).dot(dir));
      }
      auto eval = [&](double sdual) {
        cand_power = 0.0;
        for (std::size_t i = 0; i < users.size(); ++i) {
          const int k = users[i];
          const double den = quad[i] + sdual + base;
          if (st.degenerate[k] || den <= 0.0) {
            cand[i] = cvec::Zero(n);
            continue;
          }
          const double x = std::max(0.0, lin[i] / den);
          cand[i] = x * prob.fixed_directions[k];
          cand_power += x * x;
        }
        return cand_power;
      };
      bisect_power(st, cfg, b, p_max, eval);
    } else {
      cmat m_b = cmat::Zero(n, n);
      for (int j = 0; j < num_users; ++j) {
        const double coef = st.d[j] * std::norm(st.u[j]);
        if (coef > 0.0) m_b.noalias() += coef * cs.h[b].col(j) * cs.h[b].col(j).adjoint();
      }
      cmat rhs(n, users.size());
      for (std::size_t i = 0; i < users.size(); ++i) rhs.col(i) = cs.h[b].col(users[i]);

      auto eval = [&](double sdual) {
        cmat a = m_b;
        a.diagonal().array() += sdual + base;
        Eigen::LLT<cmat> llt(a);
        if (llt.info() != Eigen::Success) {
          const double tr = a.diagonal().real().sum();
          a.diagonal().array() += std::max(1e-30, 1e-12 * tr / n);
          llt.compute(a);
          st.used_ridge_fallback = true;
        }
        cand_power = 0.0;
        if (llt.info() != Eigen::Success) {
          for (std::size_t i = 0; i < users.size(); ++i) cand[i] = cvec::Zero(n);
          return cand_power;
        }
        const cmat x = llt.solve(rhs);
        for (std::size_t i = 0; i < users.size(); ++i) {
          const int k = users[i];
          const cplx scale = st.d[k] * st.u[k];
          cand[i] = st.degenerate[k] ? cvec::Zero(n).eval() : (scale * x.col(i)).eval();
          cand_power += cand[i].squaredNorm();
        }
        return cand_power;
      };
      bisect_power(st, cfg, b, p_max, eval);
    }

    for (std::size_t i = 0; i < users.size(); ++i) st.w.w[users[i]] = cand[i];
  }
  recompute_cross(st, cs);
}

void update_receivers(SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  set_mmse_receivers(st, prob.env);
  if (cfg.mode == SolveMode::Decentralized) ++st.ota_iterations;
}

void update_locals(SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  const double p_rd = internal_p_rd(prob, cfg);
  const double m = prob.env.power.m_exponent;
  const bool netee = cfg.objective == ObjectiveKind::NetworkEE;

  for (int k = 0; k < cs.num_users(); ++k) {
    if (st.degenerate[k]) {
      st.gamma[k] = 0.0;
      st.gamma_pinned[k] = true;
      continue;
    }
    const double dk = denom(st, prob.env, k);
    const cplx g = st.cross(k, k);
    const double eps =
        std::norm(st.u[k]) * dk - 2.0 * std::real(std::conj(st.u[k]) * g) + 1.0;
    const double gp = st.gamma_prev[k];
    const double raw = -eps * (1.0 + gp) * (1.0 + gp) + 1.0 + 2.0 * gp;
    st.gamma[k] = std::max(0.0, raw);
    // raw < 0 means no gamma >= 0 satisfies the MSE tangent at this point;
    // the user is being de-served and its multiplier decays instead of
    // spiking through the (1+gamma_prev)^2 factor.
    st.gamma_pinned[k] = raw < 0.0;
  }
  const auto tx = st.w.per_bs_tx_power(cs);
  for (int b = 0; b < cs.num_bs(); ++b) {
    double sum_log = 0.0;
    for (int k : cs.cell_users[b]) sum_log += std::log1p(st.gamma[k]);
    st.r[b] = std::sqrt(prob.env.alpha_hz * sum_log);
    st.z[b] = tx[b] / prob.env.power.eta + prob.env.p_cp_w[b] + rate_power_w(st.r[b], p_rd, m);
  }
  if (netee) {
    st.p = 0.0;
    for (double zb : st.z) st.p += zb;
  }
  for (int b = 0; b < cs.num_bs(); ++b) {
    const double ratio = st.r_prev[b] / (netee ? st.p_prev : st.z_prev[b]);
    st.t[b] = 2.0 * ratio * st.r[b] - ratio * ratio * (netee ? st.p : st.z[b]);
  }
}

void update_duals(SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  const double p_rd = internal_p_rd(prob, cfg);
  const double m = prob.env.power.m_exponent;
  const bool netee = cfg.objective == ObjectiveKind::NetworkEE;

  for (int b = 0; b < cs.num_bs(); ++b) {
    const double scale0 = netee ? st.p_prev : st.z_prev[b];
    const double snap_ratio = st.r_prev[b] / scale0;
    const double a_b = netee ? 1.0 : prob.env.weights[b];
    // NetworkEE reads the previous iteration's c; WeightedSumEE rebuilds the
    // coefficient from the current snapshot.
    const double c_coef = netee ? st.c[b] : prob.env.weights[b] * snap_ratio * snap_ratio;
    const double r_eff = std::max(st.r[b], kRateFloor);
    const double num = 2.0 * snap_ratio * a_b - c_coef * rate_power_deriv(r_eff, p_rd, m);
    // At any consistent point (r = r_prev) the quotient is at most a_b/scale0,
    // which is also its r -> 0 limit; capping there keeps the dual finite when
    // a cell's rate moves fast between iterations.
    st.f[b] = std::min(std::max(0.0, num / (2.0 * r_eff)), a_b / scale0);
  }
  for (int k = 0; k < cs.num_users(); ++k) {
    if (st.degenerate[k]) continue;
    const int b = cs.serving[k];
    const double gp = st.gamma_prev[k];
    double target =
        st.f[b] * prob.env.alpha_hz * (1.0 + gp) * (1.0 + gp) / (st.gamma[k] + 1.0);
    // Trust cap: at a consistent point the target equals f*alpha*(1+gamma),
    // so the cap never binds at convergence; it only tames the transient
    // spikes caused by a fast SINR collapse between iterations.
    const double consistent =
        st.f[b] * prob.env.alpha_hz * (1.0 + std::max(gp, st.gamma[k]));
    target = std::min(target, 10.0 * consistent);
    st.d[k] += cfg.rho * (target - st.d[k]);
  }
  if (netee) {
    double shared = 0.0;
    for (int b = 0; b < cs.num_bs(); ++b) {
      const double ratio = st.r_prev[b] / st.p_prev;
      shared += ratio * ratio;
    }
    st.c.assign(cs.num_bs(), shared);
  } else {
    for (int b = 0; b < cs.num_bs(); ++b) {
      const double ratio = st.r_prev[b] / st.z_prev[b];
      st.c[b] = prob.env.weights[b] * ratio * ratio;
    }
  }
}

void refresh_expansion(SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  const double p_rd = internal_p_rd(prob, cfg);
  const double m = prob.env.power.m_exponent;
  const bool netee = cfg.objective == ObjectiveKind::NetworkEE;

  for (int k = 0; k < cs.num_users(); ++k) {
    const double dk = denom(st, prob.env, k);
    const double sig = std::norm(st.cross(k, k));
    st.beta[k] = dk - sig;
    st.gamma[k] = st.degenerate[k] ? 0.0 : sig / st.beta[k];
    st.gamma_pinned[k] = st.degenerate[k];
    st.tangent_v[k] = st.cross(k, k) / st.beta[k];
    st.tangent_psi[k] = sig / (st.beta[k] * st.beta[k]);
  }
  const auto tx = st.w.per_bs_tx_power(cs);
  for (int b = 0; b < cs.num_bs(); ++b) {
    double sum_log = 0.0;
    for (int k : cs.cell_users[b]) sum_log += std::log1p(st.gamma[k]);
    st.r[b] = std::sqrt(prob.env.alpha_hz * sum_log);
    st.z[b] = tx[b] / prob.env.power.eta + prob.env.p_cp_w[b] + rate_power_w(st.r[b], p_rd, m);
  }
  st.p = 0.0;
  for (double zb : st.z) st.p += zb;
  for (int b = 0; b < cs.num_bs(); ++b)
    st.t[b] = st.r[b] * st.r[b] / (netee ? st.p : st.z[b]);
  freeze_snapshot(st);
  if (netee) {
    double shared = 0.0;
    for (int b = 0; b < cs.num_bs(); ++b) {
      const double ratio = st.r_prev[b] / st.p_prev;
      shared += ratio * ratio;
    }
    st.c.assign(cs.num_bs(), shared);
  } else {
    for (int b = 0; b < cs.num_bs(); ++b) {
      const double ratio = st.r_prev[b] / st.z_prev[b];
      st.c[b] = prob.env.weights[b] * ratio * ratio;
    }
  }
}

namespace {

// --- tangent-SCA engine (Centralized mode) ---
// One convex subproblem per outer step, expanded at (w0, beta0, r0, z0) with
// the quadratic-over-linear tangents; solved through its KKT system by
// alternating the closed-form pieces below.

// f and d evaluated against the frozen expansion; d is bounded by f * alpha.
// step = 1 assigns the targets outright (used when entering a fresh
// subproblem, where duals carried over from the previous expansion would be
// scaled inconsistently); smaller steps damp the in-subproblem alternation.
void tangent_duals(SolverState& st, const Problem& prob, const SolverConfig& cfg, double step) {
  const ChannelSet& cs = *prob.design;
  const double p_rd = internal_p_rd(prob, cfg);
  const double m = prob.env.power.m_exponent;
  const bool netee = cfg.objective == ObjectiveKind::NetworkEE;
  for (int b = 0; b < cs.num_bs(); ++b) {
    const double scale0 = netee ? st.p_prev : st.z_prev[b];
    const double a_b = netee ? 1.0 : prob.env.weights[b];
    const double c_coef = st.c[b];
    const double r_eff = std::max(st.r[b], kRateFloor);
    const double num =
        2.0 * (st.r_prev[b] / scale0) * a_b - c_coef * rate_power_deriv(r_eff, p_rd, m);
    st.f[b] = std::min(std::max(0.0, num / (2.0 * r_eff)), a_b / scale0);
  }
  for (int k = 0; k < cs.num_users(); ++k) {
    if (st.degenerate[k]) {
      st.d[k] = 0.0;
      continue;
    }
    const double target = st.f[cs.serving[k]] * prob.env.alpha_hz / (1.0 + st.gamma[k]);
    st.d[k] += step * (target - st.d[k]);
  }
}

// w_k = d_k v_k (sum_{j != k} e_j h_{b,j} h_{b,j}^H + (c_b/eta + s_b) I)^{-1} h_{b_k,k}
// with e_j = d_j psi_j; the per-user exclusion is a rank-one downdate of the
// shared cell matrix, applied via Sherman-Morrison.
void tangent_beamformers(SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  const int num_bs = cs.num_bs();
  const int num_users = cs.num_users();
  const int n = cs.antennas();
  const bool fixed = !prob.fixed_directions.empty();

  std::vector<double> e(num_users);
  for (int k = 0; k < num_users; ++k) e[k] = st.d[k] * st.tangent_psi[k];

  for (int b = 0; b < num_bs; ++b) {
    const auto& users = cs.cell_users[b];
    if (users.empty()) {
      st.s[b] = 0.0;
      continue;
    }
    const double base = st.c[b] / prob.env.power.eta;
    const double p_max = prob.env.p_max_w[b];
    std::vector<cvec> cand(users.size());

    if (fixed) {
      std::vector<double> quad(users.size(), 0.0);  // dir^H (sum_{j!=k} e_j h_j h_j^H) dir
      std::vector<double> lin(users.size(), 0.0);   // Re(dir^H d_k v_k h_k)
      for (std::size_t i = 0; i < users.size(); ++i) {
        const int k = users[i];
        if (st.degenerate[k]) continue;
        const cvec& dir = prob.fixed_directions[k];
        for (int j = 0; j < num_users; ++j) {
          if (j == k || e[j] <= 0.0) continue;
          quad[i] += e[j] * std::norm(cs.h[b].col(j).dot(dir));
        }
        lin[i] = st.d[k] * std::real(st.tangent_v[k] * std::conj(cs.h[b].col(k).dot(dir)));
      }
      auto eval = [&](double sdual) {
        double power = 0.0;
        for (std::size_t i = 0; i < users.size(); ++i) {
          const int k = users[i];
          const double den = quad[i] + sdual + base;
          if (st.degenerate[k] || den <= 0.0) {
            cand[i] = cvec::Zero(n);
            continue;
          }
          const double x = std::max(0.0, lin[i] / den);
          cand[i] = x * prob.fixed_directions[k];
          power += x * x;
        }
        return power;
      };
      bisect_power(st, cfg, b, p_max, eval);
    } else {
      cmat m_b = cmat::Zero(n, n);
      for (int j = 0; j < num_users; ++j)
        if (e[j] > 0.0) m_b.noalias() += e[j] * cs.h[b].col(j) * cs.h[b].col(j).adjoint();

      auto eval = [&](double sdual) {
        cmat a = m_b;
        a.diagonal().array() += sdual + base;
        Eigen::LLT<cmat> llt(a);
        if (llt.info() != Eigen::Success) {
          const double tr = a.diagonal().real().sum();
          a.diagonal().array() += std::max(1e-30, 1e-12 * tr / n);
          llt.compute(a);
          st.used_ridge_fallback = true;
        }
        double power = 0.0;
        for (std::size_t i = 0; i < users.size(); ++i) {
          const int k = users[i];
          if (st.degenerate[k] || st.d[k] == 0.0) {
            cand[i] = cvec::Zero(n);
            continue;
          }
          const cvec x = llt.solve(cs.h[b].col(k));
          const double quad = std::real(cs.h[b].col(k).dot(x));
          const double downdate = 1.0 - e[k] * quad;
          const cplx scale = st.d[k] * st.tangent_v[k] / downdate;
          cand[i] = scale * x;
          power += cand[i].squaredNorm();
        }
        return power;
      };
      bisect_power(st, cfg, b, p_max, eval);
    }
    for (std::size_t i = 0; i < users.size(); ++i) st.w.w[users[i]] = cand[i];
  }
  recompute_cross(st, cs);
}

// Active-constraint recovery of (beta, gamma, r, z, t) at the current beams.
void tangent_locals(SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  const double p_rd = internal_p_rd(prob, cfg);
  const double m = prob.env.power.m_exponent;
  const bool netee = cfg.objective == ObjectiveKind::NetworkEE;

  for (int k = 0; k < cs.num_users(); ++k) {
    if (st.degenerate[k]) {
      st.gamma[k] = 0.0;
      continue;
    }
    const double dk = denom(st, prob.env, k);
    const double sig = std::norm(st.cross(k, k));
    st.beta[k] = dk - sig;
    const double psi_bound =
        2.0 * std::real(std::conj(st.tangent_v[k]) * st.cross(k, k)) -
        st.tangent_psi[k] * st.beta[k];
    st.gamma[k] = std::max(0.0, psi_bound);
  }
  const auto tx = st.w.per_bs_tx_power(cs);
  for (int b = 0; b < cs.num_bs(); ++b) {
    double sum_log = 0.0;
    for (int k : cs.cell_users[b]) sum_log += std::log1p(st.gamma[k]);
    st.r[b] = std::sqrt(prob.env.alpha_hz * sum_log);
    st.z[b] = tx[b] / prob.env.power.eta + prob.env.p_cp_w[b] + rate_power_w(st.r[b], p_rd, m);
  }
  if (netee) {
    st.p = 0.0;
    for (double zb : st.z) st.p += zb;
  }
  for (int b = 0; b < cs.num_bs(); ++b) {
    const double ratio = st.r_prev[b] / (netee ? st.p_prev : st.z_prev[b]);
    st.t[b] = 2.0 * ratio * st.r[b] - ratio * ratio * (netee ? st.p : st.z[b]);
  }
}

}  // namespace

double objective(const SolverState& st, const Problem& prob, const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  const double p_rd = internal_p_rd(prob, cfg);
  const double m = prob.env.power.m_exponent;
  std::vector<double> bs_nats(cs.num_bs(), 0.0);
  for (int k = 0; k < cs.num_users(); ++k) {
    if (st.degenerate[k]) continue;
    const double dk = denom(st, prob.env, k);
    const double sig = std::norm(st.cross(k, k));
    bs_nats[cs.serving[k]] += prob.env.alpha_hz * std::log1p(sig / (dk - sig));
  }
  const auto tx = st.w.per_bs_tx_power(cs);
  if (cfg.objective == ObjectiveKind::NetworkEE) {
    double bits = 0.0, watts = 0.0;
    for (int b = 0; b < cs.num_bs(); ++b) {
      bits += bs_nats[b] * kNatsToBits;
      watts += tx[b] / prob.env.power.eta + prob.env.p_cp_w[b] +
               p_rd * delta(nats_to_gbits(bs_nats[b]), m);
    }
    return bits / watts;
  }
  double sum = 0.0;
  for (int b = 0; b < cs.num_bs(); ++b) {
    const double watts = tx[b] / prob.env.power.eta + prob.env.p_cp_w[b] +
                         p_rd * delta(nats_to_gbits(bs_nats[b]), m);
    sum += prob.env.weights[b] * bs_nats[b] * kNatsToBits / watts;
  }
  return sum;
}

RunResult solve(const Problem& prob, const SolverConfig& cfg) {
  // Rate-power continuation: solve with P_RD = 0 first, then refine from that
  // point with the full model.
  if (cfg.mode == SolveMode::Centralized && cfg.prd_continuation && cfg.rate_power_aware &&
      prob.env.power.p_rd > 0.0 && !prob.warm_start) {
    SolverConfig relaxed = cfg;
    relaxed.rate_power_aware = false;
    relaxed.prd_continuation = false;
    RunResult base = solve(prob, relaxed);
    // Linear rate power with a uniform coefficient turns the network EE into
    // a monotone transform of the rate-independent one, so the refinement leg
    // cannot move the solution.
    if (cfg.objective == ObjectiveKind::NetworkEE && prob.env.power.m_exponent == 1.0)
      return base;
    Problem continued = prob;
    continued.warm_start = &base.state.w;
    SolverConfig full = cfg;
    full.prd_continuation = false;
    RunResult res = solve(continued, full);
    res.state.backhaul_scalars = base.state.backhaul_scalars;  // CSI uploaded once
    return res;
  }

  RunResult res;
  SolverState st = init_state(prob, cfg);
  const ChannelSet& cs = *prob.design;
  const bool netee = cfg.objective == ObjectiveKind::NetworkEE;

  if (cfg.mode == SolveMode::Centralized) {
    // the tangent engine's dual convention: d = f * alpha / (1 + gamma)
    for (int k = 0; k < cs.num_users(); ++k)
      st.d[k] = st.degenerate[k]
                    ? 0.0
                    : st.f[cs.serving[k]] * prob.env.alpha_hz / (1.0 + st.gamma[k]);
  }

  if (cfg.mode != SolveMode::Decentralized && cs.num_bs() > 1) {
    // One-time CSI upload to the controller.
    long long csi = 0;
    for (int b = 0; b < cs.num_bs(); ++b)
      csi += 2LL * (cs.num_bs() - 1) * cs.cell_users[b].size() * cs.antennas();
    st.backhaul_scalars = csi;
  }

  std::vector<double> objs;
  objs.push_back(objective(st, prob, cfg));
  res.trace.push_back({0, objs.back(), st.ota_iterations, st.backhaul_scalars,
                       max_power_slack(st, prob)});

  long long per_iter_backhaul = 0;
  if (cfg.mode == SolveMode::Decentralized) {
    per_iter_backhaul = cs.num_users() + (netee ? 2LL * cs.num_bs() : 0LL);
  }

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (cfg.mode == SolveMode::Decentralized) {
      update_beamformers(st, prob, cfg);
      if (it % cfg.receiver_period == 0) update_receivers(st, prob, cfg);
      update_locals(st, prob, cfg);
      update_duals(st, prob, cfg);
      st.backhaul_scalars += per_iter_backhaul;
      freeze_snapshot(st);
    } else {
      // Centralized modes: one convex subproblem per outer iteration. Every
      // inner iterate is feasible for the monotone chain (its clamped gamma
      // never exceeds the true SINR), so the subproblem's answer is the
      // best-surrogate iterate seen; restoring it makes the outer objective
      // trace nondecreasing even when the inner alternation stops early.
      if (cfg.mode == SolveMode::Centralized && it > 1) refresh_expansion(st, prob, cfg);
      const BeamformerSet w_incumbent = st.w;
      const double obj_incumbent = objs.back();
      std::vector<double> inner;
      inner.push_back(surrogate(st, prob, cfg));
      std::vector<double> d_prev = st.d;
      SolverState best = st;
      double best_val = inner.back();
      for (int j = 0; j < cfg.max_inner_iterations; ++j) {
        if (cfg.mode == SolveMode::Centralized) {
          tangent_duals(st, prob, cfg, j == 0 ? 1.0 : cfg.inner_damping);
          tangent_beamformers(st, prob, cfg);
          tangent_locals(st, prob, cfg);
        } else {
          update_beamformers(st, prob, cfg);
          update_locals(st, prob, cfg);
          update_duals(st, prob, cfg);
        }
        inner.push_back(surrogate(st, prob, cfg));
        if (!std::isfinite(inner.back())) break;
        if (inner.back() > best_val) {
          best_val = inner.back();
          best = st;
        }
        double d_scale = 1e-300, d_step = 0.0;
        for (std::size_t k = 0; k < st.d.size(); ++k) {
          d_scale = std::max(d_scale, std::abs(st.d[k]));
          d_step = std::max(d_step, std::abs(st.d[k] - d_prev[k]));
        }
        d_prev = st.d;
        if (stalled(inner, cfg.inner_xi, cfg.stall_window) && d_step <= cfg.inner_xi * d_scale)
          break;
      }
      if (best_val > surrogate(st, prob, cfg)) st = best;
      if (cfg.mode == SolveMode::Centralized) {
        // Line search on the true objective between the incumbent and the
        // subproblem candidate. Per-BS power is convex, so every mix is
        // feasible; the incumbent itself is the fallback, which makes the
        // outer trace nondecreasing by construction.
        const int num_users = cs.num_users();
        BeamformerSet pick = w_incumbent;
        double pick_obj = obj_incumbent;
        for (double theta : {1.0, 0.75, 0.5, 0.25}) {
          SolverState probe = st;
          for (int k = 0; k < num_users; ++k)
            probe.w.w[k] = (1.0 - theta) * w_incumbent.w[k] + theta * st.w.w[k];
          recompute_cross(probe, cs);
          const double val = objective(probe, prob, cfg);
          if (std::isfinite(val) && val > pick_obj) {
            pick_obj = val;
            pick = probe.w;
          }
        }
        st.w = pick;
        recompute_cross(st, cs);
      } else {
        update_receivers(st, prob, cfg);
        refresh_expansion(st, prob, cfg);
      }
    }
    st.iterations = it;

    const double obj = objective(st, prob, cfg);
    res.trace.push_back({it, obj, st.ota_iterations, st.backhaul_scalars,
                         max_power_slack(st, prob)});
    if (!std::isfinite(obj)) {
      res.diverged = true;
      res.note = "objective is not finite; aborting with diagnostic state";
      break;
    }
    objs.push_back(obj);
    if (stalled(objs, cfg.xi, cfg.stall_window)) {
      if (res.stabilized_iteration < 0) res.stabilized_iteration = it;
      res.converged = true;
      break;
    }
    if (cfg.mode == SolveMode::Decentralized && st.ota_iterations >= cfg.ota_budget) break;
  }

  const ChannelSet& truth = prob.truth_channels();
  res.net = network_ee(truth, st.w, prob.env);
  res.wsum = wsum_ee(truth, st.w, prob.env);
  res.state = std::move(st);
  return res;
}

KktDiagnostics kkt_residuals(const SolverState& st, const Problem& prob,
                             const SolverConfig& cfg) {
  const ChannelSet& cs = *prob.design;
  KktDiagnostics diag;
  const auto tx = st.w.per_bs_tx_power(cs);
  for (int b = 0; b < cs.num_bs(); ++b) {
    diag.max_comp_slack =
        std::max(diag.max_comp_slack, st.s[b] * (tx[b] - prob.env.p_max_w[b]));
    diag.max_power_slack =
        std::max(diag.max_power_slack, (tx[b] - prob.env.p_max_w[b]) / prob.env.p_max_w[b]);
  }
  const bool tangent = cfg.mode == SolveMode::Centralized;
  for (int k = 0; k < cs.num_users(); ++k) {
    if (st.degenerate[k] || st.d[k] == 0.0) continue;
    const int b = cs.serving[k];
    cvec grad = (st.c[b] / prob.env.power.eta + st.s[b]) * st.w.w[k];
    double rhs_scale;
    if (tangent) {
      for (int j = 0; j < cs.num_users(); ++j) {
        if (j == k) continue;
        const double coef = st.d[j] * st.tangent_psi[j];
        if (coef > 0.0) grad += coef * cs.h[b].col(j) * (cs.h[b].col(j).dot(st.w.w[k]));
      }
      grad -= st.d[k] * st.tangent_v[k] * cs.h[b].col(k);
      rhs_scale = st.d[k] * std::abs(st.tangent_v[k]);
    } else {
      for (int j = 0; j < cs.num_users(); ++j) {
        const double coef = st.d[j] * std::norm(st.u[j]);
        if (coef > 0.0) grad += coef * cs.h[b].col(j) * (cs.h[b].col(j).dot(st.w.w[k]));
      }
      grad -= st.d[k] * st.u[k] * cs.h[b].col(k);
      rhs_scale = st.d[k] * std::abs(st.u[k]);
    }
    const double scale = cs.h[b].col(k).norm() * std::max(rhs_scale, 1e-300);
    diag.max_stationarity_rel = std::max(diag.max_stationarity_rel, grad.norm() / scale);
  }
  return diag;
}

}  // namespace eebeam
