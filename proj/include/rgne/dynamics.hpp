#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "rgne/common.hpp"
#include "rgne/extended_game.hpp"

namespace rgne {

/// One player's local variables.
struct AgentState {
  Vec z;          // col{x_i, sigma_i}
  double lambda;  // >= 0
  double zeta;
};

struct NeighborInfo {
  double lambda;
  double zeta;
  double weight;  // a_ij > 0
};

struct AgentDerivative {
  Vec z_dot;
  double lambda_dot;
  double zeta_dot;
};

/// Right-hand sides of the projected dynamics for player i:
///   z_i'      = Pi_{Omega_i}(z_i - g_i - B_i^T lambda_i) - z_i
///   lambda_i' = [lambda_i + B_i z_i - b_i - sum a_ij (lambda_i - lambda_j)
///                - sum a_ij (zeta_i - zeta_j)]^+ - lambda_i
///   zeta_i'   = sum a_ij (lambda_i - lambda_j)
///
/// The player reads only its own block, its neighbors' (lambda, zeta) and the
/// x-blocks that enter its own cost gradient (`observed_x`).
inline AgentDerivative agent_step(const ExtendedGame& eg, int i,
                                  const AgentState& local,
                                  std::span<const NeighborInfo> neighbors,
                                  const Vec& observed_x,
                                  const DykstraOptions& proj = {}) {
  require_dim(local.z, eg.block_size(i), "agent_step z_i");
  require_dim(observed_x, eg.base().profile_size(), "agent_step observed_x");
  const int n = eg.dim();

  Vec g_i = Vec::Zero(eg.block_size(i));
  g_i.head(n) = eg.base().cost().own_gradient(i, observed_x);

  const Vec target = local.z - g_i - eg.B(i) * local.lambda;
  AgentDerivative d;
  d.z_dot = project_omega(eg, i, target, proj) - local.z;

  double consensus_l = 0.0, consensus_z = 0.0;
  for (const auto& nb : neighbors) {
    consensus_l += nb.weight * (local.lambda - nb.lambda);
    consensus_z += nb.weight * (local.zeta - nb.zeta);
  }
  const double pre = local.lambda + eg.B(i).dot(local.z) - eg.budget_share(i) -
                     consensus_l - consensus_z;
  d.lambda_dot = std::max(0.0, pre) - local.lambda;
  d.zeta_dot = consensus_l;
  return d;
}

enum class Scheme { ExplicitEuler, RungeKutta4 };

struct IntegratorConfig {
  double step_size = 0.01;
  double max_time = 500.0;
  double tol = 1e-4;        // terminate when ||y'|| <= tol
  Scheme scheme = Scheme::ExplicitEuler;
  int record_stride = 10;
  DykstraOptions projection;
};

struct SwarmTrajectory {
  std::vector<double> times;
  std::vector<ExtendedState> states;
  std::vector<double> deriv_norms;
  std::vector<double> lyapunov;  // filled by attach_lyapunov
  ExtendedState final_state;
  double final_deriv_norm = 0.0;
  double final_time = 0.0;
  long rounds = 0;
  bool converged = false;
};

namespace detail {

inline Vec stack_state(const ExtendedState& s) {
  Vec y(s.z.size() + s.lambda.size() + s.zeta.size());
  y << s.z, s.lambda, s.zeta;
  return y;
}

inline ExtendedState unstack_state(const ExtendedGame& eg, const Vec& y) {
  const Eigen::Index zs = eg.z_size();
  const int N = eg.players();
  ExtendedState s;
  s.z = y.head(zs);
  s.lambda = y.segment(zs, N);
  s.zeta = y.tail(N);
  return s;
}

/// Synchronous-round derivative: every agent reads the same snapshot.
inline Vec swarm_derivative(const ExtendedGame& eg, const ExtendedState& s,
                            const DykstraOptions& proj) {
  const int N = eg.players();
  const Vec x = eg.x_profile(s.z);
  const Mat& adj = eg.base().graph().adjacency();
  Vec dz(eg.z_size());
  Vec dl(N), dzeta(N);
  for (int i = 0; i < N; ++i) {
    AgentState local{eg.z_block(s.z, i), s.lambda(i), s.zeta(i)};
    std::vector<NeighborInfo> nbs;
    for (int j = 0; j < N; ++j)
      if (j != i && adj(i, j) > 0.0)
        nbs.push_back({s.lambda(j), s.zeta(j), adj(i, j)});
    const AgentDerivative d = agent_step(eg, i, local, nbs, x, proj);
    dz.segment(eg.z_offset(i), eg.block_size(i)) = d.z_dot;
    dl(i) = d.lambda_dot;
    dzeta(i) = d.zeta_dot;
  }
  Vec dy(eg.z_size() + 2 * N);
  dy << dz, dl, dzeta;
  return dy;
}

}  // namespace detail

inline ExtendedState make_state(const ExtendedGame& eg,
                                std::span<const AgentState> agents) {
  require(static_cast<int>(agents.size()) == eg.players(),
          Errc::DimensionMismatch, "make_state: one agent per player");
  ExtendedState s;
  s.z = Vec(eg.z_size());
  s.lambda = Vec(eg.players());
  s.zeta = Vec(eg.players());
  for (int i = 0; i < eg.players(); ++i) {
    require_dim(agents[i].z, eg.block_size(i), "make_state agent z");
    s.z.segment(eg.z_offset(i), eg.block_size(i)) = agents[i].z;
    s.lambda(i) = agents[i].lambda;
    s.zeta(i) = agents[i].zeta;
  }
  return s;
}

/// Default initialization: x_i(0) = box-projected nominal (or box center),
/// sigma = 0, everything re-projected onto Omega_i; lambda = zeta = 0.
inline ExtendedState default_init(const ExtendedGame& eg) {
  ExtendedState s;
  s.z = Vec::Zero(eg.z_size());
  s.lambda = Vec::Zero(eg.players());
  s.zeta = Vec::Zero(eg.players());
  const auto& cost = eg.base().cost();
  for (int i = 0; i < eg.players(); ++i) {
    Vec zi = Vec::Zero(eg.block_size(i));
    const Vec goal = cost.is_demand_response() ? cost.nominal()[i]
                                               : eg.base().box(i).center();
    zi.head(eg.dim()) = eg.base().box(i).project(goal);
    DykstraOptions init_proj;
    init_proj.max_iters = 5000;
    s.z.segment(eg.z_offset(i), eg.block_size(i)) =
        project_omega(eg, i, zi, init_proj);
  }
  return s;
}

/// Runs the synchronous round-based simulation until ||y'|| <= tol or
/// max_time. Every round all agents advance from the previous snapshot; after
/// each advance z is re-projected onto Omega and lambda clamped nonnegative
/// to kill discretization drift.
inline SwarmTrajectory run_dynamics(const ExtendedGame& eg, ExtendedState init,
                                    const IntegratorConfig& cfg) {
  require(cfg.step_size > 0.0, Errc::InvalidArgument,
          "run_dynamics: step_size > 0 required");
  require(cfg.tol > 0.0, Errc::InvalidArgument, "run_dynamics: tol > 0 required");
  require(cfg.max_time > 0.0, Errc::InvalidArgument,
          "run_dynamics: max_time > 0 required");
  require(eg.omega_residual(init.z) <= 1e-7 && init.lambda.minCoeff() >= 0.0,
          Errc::InvalidArgument, "run_dynamics: infeasible initial state");

  const int N = eg.players();
  const double h = cfg.step_size;
  const int stride = std::max(1, cfg.record_stride);

  SwarmTrajectory traj;
  Vec y = detail::stack_state(init);
  double t = 0.0;
  long round = 0;

  auto deriv = [&](const Vec& yy) {
    return detail::swarm_derivative(eg, detail::unstack_state(eg, yy),
                                    cfg.projection);
  };
  auto reproject = [&](Vec& yy) {
    ExtendedState s = detail::unstack_state(eg, yy);
    for (int i = 0; i < N; ++i)
      s.z.segment(eg.z_offset(i), eg.block_size(i)) = project_omega(
          eg, i, eg.z_block(s.z, i), cfg.projection);
    s.lambda = s.lambda.cwiseMax(0.0);
    yy = detail::stack_state(s);
  };

  while (true) {
    const Vec dy = deriv(y);
    const double norm = dy.norm();
    require(std::isfinite(norm), Errc::Diverged,
            "run_dynamics: non-finite derivative");
    if (round % stride == 0) {
      traj.times.push_back(t);
      traj.states.push_back(detail::unstack_state(eg, y));
      traj.deriv_norms.push_back(norm);
    }
    if (norm <= cfg.tol) {
      traj.converged = true;
      break;
    }
    if (t >= cfg.max_time) break;

    if (cfg.scheme == Scheme::ExplicitEuler) {
      y += h * dy;
    } else {
      const Vec k1 = dy;
      const Vec k2 = deriv(y + 0.5 * h * k1);
      const Vec k3 = deriv(y + 0.5 * h * k2);
      const Vec k4 = deriv(y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    reproject(y);
    t += h;
    ++round;
    if (y.norm() > 1e8)
      throw Error(Errc::Diverged, "run_dynamics: diverged (||y|| > 1e8)",
                  y.norm());
  }

  traj.final_state = detail::unstack_state(eg, y);
  traj.final_deriv_norm = deriv(y).norm();
  traj.final_time = t;
  traj.rounds = round;
  if (traj.times.empty() || traj.times.back() != t) {
    traj.times.push_back(t);
    traj.states.push_back(traj.final_state);
    traj.deriv_norms.push_back(traj.final_deriv_norm);
  }
  return traj;
}

/// Lyapunov value of a state against a reference equilibrium:
///   V = -<Fh(s), U(s)-s> - 1/2 ||U(s)-s||^2 + 1/2 ||s-s*||^2
/// with Fh the stacked operator of the full dynamics and U the projection of
/// s - Fh(s) onto Omega x R+^N x R^N.
inline double lyapunov_value(const ExtendedGame& eg, const ExtendedState& s,
                             const ExtendedState& reference,
                             const DykstraOptions& proj = {}) {
  const int N = eg.players();
  const Mat L = eg.base().graph().laplacian();
  const Vec g = extended_pseudo_gradient(eg, s.z);
  Vec Bt_lambda = Vec::Zero(eg.z_size());
  for (int i = 0; i < N; ++i)
    Bt_lambda.segment(eg.z_offset(i), eg.block_size(i)) =
        eg.B(i) * s.lambda(i);

  Vec fh(eg.z_size() + 2 * N);
  fh << g + Bt_lambda,
      -eg.budget_usage(s.z) + eg.budget_split() + L * s.lambda + L * s.zeta,
      -L * s.lambda;

  const Vec y = detail::stack_state(s);
  const Vec target = y - fh;
  ExtendedState ts = detail::unstack_state(eg, target);
  Vec u(y.size());
  for (int i = 0; i < N; ++i)
    u.segment(eg.z_offset(i), eg.block_size(i)) =
        project_omega(eg, i, eg.z_block(ts.z, i), proj);
  u.segment(eg.z_size(), N) = ts.lambda.cwiseMax(0.0);
  u.tail(N) = ts.zeta;

  const Vec diff = u - y;
  const Vec ref = detail::stack_state(reference);
  return -fh.dot(diff) - 0.5 * diff.squaredNorm() +
         0.5 * (y - ref).squaredNorm();
}

/// Fills traj.lyapunov with V(state_k) against the given reference.
inline void attach_lyapunov(const ExtendedGame& eg, SwarmTrajectory& traj,
                            const ExtendedState& reference) {
  traj.lyapunov.clear();
  traj.lyapunov.reserve(traj.states.size());
  for (const auto& s : traj.states)
    traj.lyapunov.push_back(lyapunov_value(eg, s, reference));
}

}  // namespace rgne
