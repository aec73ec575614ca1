#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "rgne/common.hpp"
#include "rgne/dynamics.hpp"
#include "rgne/extended_game.hpp"
#include "rgne/game.hpp"
#include "rgne/metrics.hpp"

namespace rgne {

/// First-order condition residuals at a candidate equilibrium.
struct KktReport {
  double stationarity = 0.0;    // ||z - Pi_Omega(z - g(z) - B^T lambda)||
  double primal_feas = 0.0;     // [1^T (B z - b)]^+
  double complementarity = 0.0; // |(B z - b)^T lambda|
  double consensus = 0.0;       // ||L lambda||
};

inline KktReport kkt_residuals(const ExtendedGame& eg, const ExtendedState& s,
                               const DykstraOptions& proj = {}) {
  require_dim(s.lambda, eg.players(), "kkt_residuals lambda");
  const Vec g = extended_pseudo_gradient(eg, s.z);
  Vec proj_point(eg.z_size());
  for (int i = 0; i < eg.players(); ++i) {
    const Vec zi = eg.z_block(s.z, i);
    const Vec gi = g.segment(eg.z_offset(i), eg.block_size(i));
    proj_point.segment(eg.z_offset(i), eg.block_size(i)) =
        project_omega(eg, i, zi - gi - eg.B(i) * s.lambda(i), proj);
  }
  const Vec slack = eg.budget_usage(s.z) - eg.budget_split();
  KktReport r;
  r.stationarity = (s.z - proj_point).norm();
  r.primal_feas = std::max(0.0, slack.sum());
  r.complementarity = std::abs(slack.dot(s.lambda));
  r.consensus = (eg.base().graph().laplacian() * s.lambda).norm();
  return r;
}

/// Which feasible set a profile is measured against: the polytope game the
/// algorithm actually solved, or the original worst case over the ellipsoids.
enum class ConstraintModel { PolytopeWorstCase, EllipsoidWorstCase };

struct BestResponseOptions {
  int iterations = 5000;
  int restarts = 5;
  std::uint64_t seed = 1;
};

/// Unilateral-deviation report, plus the approximation-bound inputs filled in
/// by bound_report.
struct EpsilonReport {
  ConstraintModel model = ConstraintModel::EllipsoidWorstCase;
  double empirical_eps = 0.0;
  std::vector<double> per_player_eps;
  std::vector<char> br_converged;
  bool restored = false;         // profile was projected back to feasibility
  double restore_distance = 0.0;
  Vec evaluated_profile;         // the profile the gaps were measured at
  double true_violation = 0.0;   // [worst_case_lhs(x*) - b]^+

  std::vector<ApproxMetrics> metrics;
  double radius_r = 0.0;
  std::vector<double> c_consts;
  double mu = 0.5;               // carried for reference, never evaluated
  DeltaBound delta;

  std::vector<double> lipschitz;
};

namespace detail {

struct ConstraintFns {
  std::function<double(int, const Vec&)> value;     // g_i(x_i)
  std::function<Vec(int, const Vec&)> subgradient;  // element of d g_i(x_i)
};

inline ConstraintFns constraint_model(const UncertainGame& game,
                                      const std::vector<Polytope>& polys,
                                      ConstraintModel model) {
  if (model == ConstraintModel::PolytopeWorstCase) {
    require(static_cast<int>(polys.size()) == game.players(),
            Errc::DimensionMismatch, "constraint model: one polytope per player");
    return {[&polys](int i, const Vec& x) { return polys[i].support(x); },
            [&polys](int i, const Vec& x) { return polys[i].arg_support(x); }};
  }
  return {[&game](int i, const Vec& x) {
            return x.norm() == 0.0 ? 0.0 : game.uncertainty(i).support(x);
          },
          [&game](int i, const Vec& x) -> Vec {
            if (x.norm() == 0.0) return game.uncertainty(i).center();
            return game.uncertainty(i).arg_support(x);
          }};
}

/// Pulls x_i into { x in box : g(x) <= r } by alternating box clamps and
/// subgradient halfspace cuts.
inline Vec project_constraint_set(const Box& box, const ConstraintFns& fns,
                                  int i, double r, Vec x, int cap = 400) {
  for (int it = 0; it < cap; ++it) {
    x = box.project(x);
    const double c = fns.value(i, x) - r;
    if (c <= 1e-12) return x;
    const Vec s = fns.subgradient(i, x);
    const double sn = s.squaredNorm();
    if (sn == 0.0) break;
    x -= (c / sn) * s;
  }
  return box.project(x);
}

/// Feasibility restoration of a full profile under
/// sum_i g_i(x_i) <= b, x in the box product (cyclic subgradient cuts).
inline std::pair<Vec, double> restore_profile(const UncertainGame& game,
                                              const ConstraintFns& fns,
                                              const Vec& profile) {
  const int N = game.players();
  const int n = game.dim();
  Vec x = profile;
  for (int it = 0; it < 2000; ++it) {
    for (int i = 0; i < N; ++i)
      x.segment(static_cast<Eigen::Index>(i) * n, n) =
          game.box(i).project(x.segment(static_cast<Eigen::Index>(i) * n, n));
    double total = 0.0;
    Vec sub(x.size());
    for (int i = 0; i < N; ++i) {
      const Vec xi = x.segment(static_cast<Eigen::Index>(i) * n, n);
      total += fns.value(i, xi);
      sub.segment(static_cast<Eigen::Index>(i) * n, n) = fns.subgradient(i, xi);
    }
    const double c = total - game.budget();
    if (c <= 1e-11 * std::max(1.0, std::abs(game.budget()))) break;
    const double sn = sub.squaredNorm();
    if (sn == 0.0) break;
    x -= (c / sn) * sub;
  }
  return {x, (x - profile).norm()};
}

/// Local Lipschitz estimate of the own-block gradient, for the base step.
inline double gradient_scale(const UncertainGame& game, int i, const Vec& profile,
                             std::mt19937_64& rng) {
  const int n = game.dim();
  const Vec g0 = game.cost().own_gradient(i, profile);
  std::normal_distribution<double> nd(0.0, 1.0);
  double L = 1e-6;
  for (int k = 0; k < 5; ++k) {
    Vec d(n);
    for (int j = 0; j < n; ++j) d(j) = nd(rng);
    d *= 1e-3 / d.norm();
    Vec p = profile;
    p.segment(static_cast<Eigen::Index>(i) * n, n) += d;
    L = std::max(L, (game.cost().own_gradient(i, p) - g0).norm() / d.norm());
  }
  return L;
}

}  // namespace detail

/// Definition-style empirical epsilon: how much each player can still improve
/// by unilateral deviation within the chosen feasible set, at the profile
/// x_star. When x_star violates the chosen model's coupled constraint (coarse
/// inscribed polytopes make the solved game's feasible set a superset of the
/// true one), the profile is first restored to feasibility and the report
/// flags that together with the restoration distance.
inline EpsilonReport best_response_eps(const UncertainGame& game,
                                       const std::vector<Polytope>& polys,
                                       const Vec& x_star, ConstraintModel model,
                                       const BestResponseOptions& opts = {}) {
  require_dim(x_star, game.profile_size(), "best_response_eps profile");
  const int N = game.players();
  const int n = game.dim();
  const auto fns = detail::constraint_model(game, polys, model);

  EpsilonReport rep;
  rep.model = model;
  rep.true_violation =
      std::max(0.0, game.worst_case_lhs(x_star) - game.budget());

  double lhs = 0.0;
  for (int i = 0; i < N; ++i)
    lhs += fns.value(i, x_star.segment(static_cast<Eigen::Index>(i) * n, n));
  Vec x_eval = x_star;
  // restore only on structural violations, not on integrator-tolerance dust
  if (lhs > game.budget() + 1e-6 * std::max(1.0, std::abs(game.budget()))) {
    auto [restored, dist] = detail::restore_profile(game, fns, x_star);
    x_eval = restored;
    rep.restored = true;
    rep.restore_distance = dist;
  }
  rep.evaluated_profile = x_eval;

  rep.per_player_eps.resize(N, 0.0);
  rep.br_converged.resize(N, 1);
  std::mt19937_64 rng(opts.seed);

  for (int i = 0; i < N; ++i) {
    const Vec xi0 = x_eval.segment(static_cast<Eigen::Index>(i) * n, n);
    double remaining = game.budget();
    for (int j = 0; j < N; ++j)
      if (j != i)
        remaining -=
            fns.value(j, x_eval.segment(static_cast<Eigen::Index>(j) * n, n));

    const double current_cost = game.cost().cost(i, x_eval);
    const double L = detail::gradient_scale(game, i, x_eval, rng);
    const double base_step = 1.0 / L;

    double best_cost = current_cost;  // the incumbent is always a candidate
    const Box& box = game.box(i);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int s = 0; s <= opts.restarts; ++s) {
      Vec xi = xi0;
      if (s > 0) {
        for (int k = 0; k < n; ++k)
          xi(k) = box.lower()(k) + ud(rng) * (box.upper()(k) - box.lower()(k));
      }
      xi = detail::project_constraint_set(box, fns, i, remaining, xi);
      Vec profile = x_eval;
      for (int k = 0; k < opts.iterations; ++k) {
        profile.segment(static_cast<Eigen::Index>(i) * n, n) = xi;
        const Vec grad = game.cost().own_gradient(i, profile);
        const double step = base_step / (1.0 + k / 50.0);
        xi = detail::project_constraint_set(box, fns, i, remaining,
                                            xi - step * grad);
      }
      profile.segment(static_cast<Eigen::Index>(i) * n, n) = xi;
      const double cost = game.cost().cost(i, profile);
      // crude stall detection: one extra full-step probe still improving a lot
      const Vec grad = game.cost().own_gradient(i, profile);
      Vec probe = detail::project_constraint_set(box, fns, i, remaining,
                                                 xi - base_step * grad);
      profile.segment(static_cast<Eigen::Index>(i) * n, n) = probe;
      if (game.cost().cost(i, profile) < cost - 1e-6 * (1.0 + std::abs(cost)))
        rep.br_converged[i] = 0;
      best_cost = std::min(best_cost, cost);
    }
    rep.per_player_eps[i] = std::max(0.0, current_cost - best_cost);
  }
  rep.empirical_eps = 0.0;
  for (double e : rep.per_player_eps)
    rep.empirical_eps = std::max(rep.empirical_eps, e);
  return rep;
}

/// Sampled lower estimate of the Lipschitz constant of J_i over the box
/// product.
inline double lipschitz_estimate(const UncertainGame& game, int i, int samples,
                                 std::uint64_t seed = 1) {
  require(samples >= 100, Errc::InvalidArgument,
          "lipschitz_estimate: samples >= 100 required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const int N = game.players();
  const int n = game.dim();
  auto sample_profile = [&]() {
    Vec x(game.profile_size());
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < n; ++k) {
        const Box& b = game.box(j);
        x(static_cast<Eigen::Index>(j) * n + k) =
            b.lower()(k) + ud(rng) * (b.upper()(k) - b.lower()(k));
      }
    return x;
  };
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec x = sample_profile();
    const Vec y = sample_profile();
    const double d = (x - y).norm();
    if (d < 1e-12) continue;
    best = std::max(best,
                    std::abs(game.cost().cost(i, x) - game.cost().cost(i, y)) / d);
  }
  return best;
}

/// Fills the approximation-bound inputs of a report: per-player metrics, the
/// observed iterate-ball radius r, the c_i convention constants and both
/// delta forms. The class-K composition bounding epsilon itself has no
/// constructive form, so only delta and its inputs are reported, for
/// side-by-side comparison with the empirical epsilon.
inline void bound_report(EpsilonReport& rep, std::vector<ApproxMetrics> metrics,
                         double radius_r, std::vector<double> c_consts,
                         double mu = 0.5) {
  require(metrics.size() == c_consts.size(), Errc::DimensionMismatch,
          "bound_report: one c constant per player");
  rep.metrics = std::move(metrics);
  rep.radius_r = radius_r;
  rep.c_consts = std::move(c_consts);
  rep.mu = mu;
  rep.delta = delta_bound(rep.metrics, radius_r, rep.c_consts);
}

/// max_t ||y(t) - y_final||, the iterate-ball radius entering delta.
inline double trajectory_radius(const SwarmTrajectory& traj) {
  const Vec ref = detail::stack_state(traj.final_state);
  double r = 0.0;
  for (const auto& s : traj.states)
    r = std::max(r, (detail::stack_state(s) - ref).norm());
  return r;
}

}  // namespace rgne
