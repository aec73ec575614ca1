// Shared game fixtures for the dynamics/verification suites.
#pragma once

#include <random>
#include <vector>

#include "rgne/extended_game.hpp"
#include "rgne/game.hpp"
#include "rgne/polytope.hpp"

namespace fixtures {

using rgne::Vec;

inline rgne::Ellipsoid demo_ellipse() {
  Vec c(2), v(2);
  c << 2.0, 2.0;
  v << 3.0, 2.0;
  return rgne::Ellipsoid(c, v);
}

/// The 10-user demand-response benchmark.
inline rgne::UncertainGame demo_game(double budget = 20.0, int players = 10) {
  std::vector<rgne::Box> boxes(players, rgne::Box::cube(2, -15.0, 20.0));
  std::vector<Vec> nominal;
  for (int i = 1; i <= players; ++i)
    nominal.push_back(Vec::Constant(2, static_cast<double>(5 - i)));
  std::vector<rgne::Ellipsoid> unc(players, demo_ellipse());
  return rgne::UncertainGame(boxes, rgne::CostModel::demand_response(nominal),
                             unc, budget, rgne::CommGraph::ring(players));
}

inline rgne::ExtendedGame demo_extended(int vertices = 4, double budget = 20.0,
                                        int players = 10, double phase = 0.0) {
  rgne::UncertainGame game = demo_game(budget, players);
  std::vector<rgne::Polytope> polys(
      players, rgne::inscribe_regular(demo_ellipse(), vertices, phase));
  return rgne::build_extended_game(std::move(game), std::move(polys));
}

/// Unconstrained equilibrium of the demand-response cost: solves
/// 2 x_i + sum_j x_j = w_i + N 1 jointly.
inline Vec unconstrained_equilibrium(const std::vector<Vec>& nominal) {
  const int N = static_cast<int>(nominal.size());
  const int n = static_cast<int>(nominal.front().size());
  Vec sum_w = Vec::Zero(n);
  for (const auto& w : nominal) sum_w += w;
  const Vec sum_x = (sum_w + static_cast<double>(N) * N * Vec::Ones(n)) /
                    (N + 2.0);
  Vec x(static_cast<Eigen::Index>(N) * n);
  for (int i = 0; i < N; ++i)
    x.segment(static_cast<Eigen::Index>(i) * n, n) =
        0.5 * (nominal[i] + N * Vec::Ones(n) - sum_x);
  return x;
}

/// Random small instance with an active-ish coupled constraint. The budget is
/// a fraction of the worst-case lhs at the unconstrained equilibrium, floored
/// so Slater still holds.
inline rgne::UncertainGame random_small_game(std::mt19937_64& rng, int players,
                                             int vertices = 4) {
  (void)vertices;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int n = 2;
  std::vector<rgne::Box> boxes;
  std::vector<Vec> nominal;
  std::vector<rgne::Ellipsoid> unc;
  for (int i = 0; i < players; ++i) {
    const double lo = -2.0 - u01(rng), hi = 2.0 + u01(rng);
    boxes.push_back(rgne::Box::cube(n, lo, hi));
    Vec w(n);
    w << lo + u01(rng) * (hi - lo), lo + u01(rng) * (hi - lo);
    nominal.push_back(w);
    Vec c(n), v(n);
    c << u01(rng) - 0.5, u01(rng) - 0.5;
    v << 0.3 + u01(rng), 0.3 + u01(rng);
    unc.emplace_back(c, v);
  }

  // probe the unconstrained equilibrium to place the budget
  rgne::UncertainGame probe(boxes, rgne::CostModel::demand_response(nominal),
                            unc, 1e9, rgne::CommGraph::ring(players));
  Vec xeq = unconstrained_equilibrium(nominal);
  xeq = probe.project_boxes(xeq);
  const double lhs = probe.worst_case_lhs(xeq);
  double budget = lhs > 0.0 ? 0.75 * lhs : lhs + 1.0;

  rgne::UncertainGame game(boxes, rgne::CostModel::demand_response(nominal),
                           unc, budget, rgne::CommGraph::ring(players));
  if (!game.slater_ok())
    return rgne::UncertainGame(boxes, rgne::CostModel::demand_response(nominal),
                               unc, lhs + 1.0, rgne::CommGraph::ring(players));
  return game;
}

inline rgne::ExtendedGame random_small_extended(std::mt19937_64& rng,
                                                int players, int vertices = 4) {
  std::uniform_real_distribution<double> uphase(0.0, 1.5);
  rgne::UncertainGame game = random_small_game(rng, players);
  std::vector<rgne::Polytope> polys;
  for (int i = 0; i < players; ++i)
    polys.push_back(
        rgne::inscribe_regular(game.uncertainty(i), vertices, uphase(rng)));
  return rgne::build_extended_game(std::move(game), std::move(polys));
}

}  // namespace fixtures
