#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rgne/dynamics.hpp"

using namespace rgne;
using Catch::Approx;

namespace {

SwarmTrajectory converge(const ExtendedGame& eg, double tol,
                         double max_time = 4000.0, double h = 0.01) {
  IntegratorConfig cfg;
  cfg.step_size = h;
  cfg.tol = tol;
  cfg.max_time = max_time;
  cfg.record_stride = 20;
  return run_dynamics(eg, default_init(eg), cfg);
}

std::vector<NeighborInfo> neighbors_of(const ExtendedGame& eg, int i,
                                       const ExtendedState& s) {
  std::vector<NeighborInfo> nbs;
  const Mat& adj = eg.base().graph().adjacency();
  for (int j = 0; j < eg.players(); ++j)
    if (j != i && adj(i, j) > 0.0)
      nbs.push_back({s.lambda(j), s.zeta(j), adj(i, j)});
  return nbs;
}

}  // namespace

TEST_CASE("derivatives vanish at a converged equilibrium") {
  auto rng = oracle::rng(71);
  const ExtendedGame eg = fixtures::random_small_extended(rng, 2);
  const SwarmTrajectory traj = converge(eg, 1e-10);
  REQUIRE(traj.converged);

  const ExtendedState& s = traj.final_state;
  const Vec x = eg.x_profile(s.z);
  for (int i = 0; i < eg.players(); ++i) {
    AgentState local{eg.z_block(s.z, i), s.lambda(i), s.zeta(i)};
    const AgentDerivative d =
        agent_step(eg, i, local, neighbors_of(eg, i, s), x);
    REQUIRE(d.z_dot.norm() < 1e-9);
    REQUIRE(std::abs(d.lambda_dot) < 1e-9);
    REQUIRE(std::abs(d.zeta_dot) < 1e-9);
  }
}

TEST_CASE("equal multipliers kill the consensus terms") {
  const ExtendedGame eg = fixtures::demo_extended(4, 20.0, 4);
  ExtendedState s = default_init(eg);
  s.lambda = Vec::Constant(4, 0.7);
  s.zeta = Vec::Constant(4, -0.3);
  const Vec x = eg.x_profile(s.z);
  for (int i = 0; i < 4; ++i) {
    AgentState local{eg.z_block(s.z, i), s.lambda(i), s.zeta(i)};
    const AgentDerivative d =
        agent_step(eg, i, local, neighbors_of(eg, i, s), x);
    const double want =
        std::max(0.0, 0.7 + eg.B(i).dot(local.z) - eg.budget_share(i)) - 0.7;
    REQUIRE(d.lambda_dot == Approx(want).margin(1e-14));
    REQUIRE(d.zeta_dot == 0.0);
  }
}

TEST_CASE("single uncoupled player reduces to projected gradient descent") {
  // huge budget: the coupling never activates, lambda stays at zero
  std::vector<Box> boxes{Box::cube(2, -15.0, 20.0)};
  std::vector<Vec> nominal{Vec::Constant(2, 3.0)};
  const UncertainGame game(boxes, CostModel::demand_response(nominal),
                           {fixtures::demo_ellipse()}, 1e6,
                           CommGraph::ring(1));
  const ExtendedGame eg = build_extended_game(
      game, {inscribe_regular(fixtures::demo_ellipse(), 4, 0.0)});
  const SwarmTrajectory traj = converge(eg, 1e-9);
  REQUIRE(traj.converged);
  REQUIRE(traj.final_state.lambda.cwiseAbs().maxCoeff() < 1e-9);

  // standalone oracle on the box: grad J = 3x - w - N*1 with N = 1
  const Vec w = nominal[0];
  const Vec x_oracle = oracle::projected_gradient_box(
      boxes[0],
      [&](const Vec& x) { return Vec(3.0 * x - w - Vec::Ones(2)); },
      boxes[0].center(), 0.2, 20000);
  REQUIRE((eg.x_profile(traj.final_state.z) - x_oracle).norm() < 1e-6);
}

TEST_CASE("zero-cost game: x stays put, lambda decays to zero") {
  std::vector<Box> boxes(2, Box::cube(2, -1.0, 1.0));
  const CostModel zero =
      CostModel::custom(2, [](int, const Vec&) { return 0.0; },
                        [](int, const Vec&) { return Vec::Zero(2); });
  std::vector<Ellipsoid> unc(2, Ellipsoid(Vec::Zero(2), Vec::Ones(2)));
  const UncertainGame game(boxes, zero, unc, 1e6, CommGraph::ring(2));
  std::vector<Polytope> polys(2, inscribe_regular(unc[0], 4, 0.0));
  const ExtendedGame eg = build_extended_game(game, polys);

  ExtendedState init = default_init(eg);
  init.lambda = Vec::Constant(2, 2.0);
  IntegratorConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_time = 500.0;
  const SwarmTrajectory traj = run_dynamics(eg, init, cfg);
  REQUIRE(traj.converged);
  REQUIRE((eg.x_profile(traj.final_state.z) - eg.x_profile(init.z)).norm() <
          1e-7);
  REQUIRE(traj.final_state.lambda.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("halving the step barely moves the converged point") {
  auto rng = oracle::rng(73);
  const ExtendedGame eg = fixtures::random_small_extended(rng, 3);
  const SwarmTrajectory a = converge(eg, 1e-7, 4000.0, 0.02);
  const SwarmTrajectory b = converge(eg, 1e-7, 4000.0, 0.01);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  REQUIRE((eg.x_profile(a.final_state.z) - eg.x_profile(b.final_state.z))
              .norm() < 1e-4);
}

TEST_CASE("recorded states stay feasible and times strictly increase") {
  auto rng = oracle::rng(79);
  const ExtendedGame eg = fixtures::random_small_extended(rng, 3);
  const SwarmTrajectory traj = converge(eg, 1e-6);
  REQUIRE(traj.converged);
  REQUIRE(traj.states.size() >= 3);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    REQUIRE(eg.omega_residual(traj.states[k].z) < 1e-8);
    REQUIRE(traj.states[k].lambda.minCoeff() >= 0.0);
    REQUIRE(std::isfinite(traj.deriv_norms[k]));
    if (k > 0) REQUIRE(traj.times[k] > traj.times[k - 1]);
  }
}

TEST_CASE("agent derivatives ignore non-neighbor multipliers and foreign sigma") {
  const ExtendedGame eg = fixtures::demo_extended(4, 20.0, 6);
  ExtendedState s = default_init(eg);
  s.lambda = Vec::LinSpaced(6, 0.0, 1.0);
  s.zeta = Vec::LinSpaced(6, -1.0, 1.0);

  // poison everything player 0 must not read: lambda/zeta of non-neighbors
  // (players 2..4 on the ring) and other players' sigma blocks
  ExtendedState poisoned = s;
  for (int j = 2; j <= 4; ++j) {
    poisoned.lambda(j) = 1e9;
    poisoned.zeta(j) = -1e9;
  }
  for (int j = 1; j < 6; ++j)
    poisoned.z.segment(eg.z_offset(j) + 2, eg.facet_count(j)).array() += 1e9;

  const Vec x_clean = eg.x_profile(s.z);
  const Vec x_poisoned = eg.x_profile(poisoned.z);
  REQUIRE((x_clean - x_poisoned).norm() == 0.0);  // sigma is not observable

  AgentState local{eg.z_block(s.z, 0), s.lambda(0), s.zeta(0)};
  const AgentDerivative a =
      agent_step(eg, 0, local, neighbors_of(eg, 0, s), x_clean);
  const AgentDerivative b =
      agent_step(eg, 0, local, neighbors_of(eg, 0, poisoned), x_poisoned);
  // neighbors on the ring are players 1 and 5, both unpoisoned
  REQUIRE((a.z_dot - b.z_dot).norm() == 0.0);
  REQUIRE(a.lambda_dot == b.lambda_dot);
  REQUIRE(a.zeta_dot == b.zeta_dot);
}

TEST_CASE("fixed config and init reproduce the trajectory bit for bit") {
  auto rng1 = oracle::rng(83);
  auto rng2 = oracle::rng(83);
  const ExtendedGame eg1 = fixtures::random_small_extended(rng1, 3);
  const ExtendedGame eg2 = fixtures::random_small_extended(rng2, 3);
  const SwarmTrajectory a = converge(eg1, 1e-6);
  const SwarmTrajectory b = converge(eg2, 1e-6);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    REQUIRE((a.states[k].z - b.states[k].z).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((a.states[k].lambda - b.states[k].lambda).cwiseAbs().maxCoeff() ==
            0.0);
    REQUIRE((a.states[k].zeta - b.states[k].zeta).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("rk4 reaches the same equilibrium as euler") {
  auto rng = oracle::rng(89);
  const ExtendedGame eg = fixtures::random_small_extended(rng, 2);
  IntegratorConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_time = 2000.0;
  const SwarmTrajectory euler = run_dynamics(eg, default_init(eg), cfg);
  cfg.scheme = Scheme::RungeKutta4;
  const SwarmTrajectory rk4 = run_dynamics(eg, default_init(eg), cfg);
  REQUIRE(euler.converged);
  REQUIRE(rk4.converged);
  REQUIRE((eg.x_profile(euler.final_state.z) -
           eg.x_profile(rk4.final_state.z)).norm() < 1e-5);
}

TEST_CASE("infeasible init is rejected") {
  const ExtendedGame eg = fixtures::demo_extended(4, 20.0, 2);
  ExtendedState bad = default_init(eg);
  bad.lambda(0) = -1.0;
  REQUIRE_THROWS_AS(run_dynamics(eg, bad, IntegratorConfig{}), Error);
}

TEST_CASE("timeout returns an unconverged trajectory") {
  const ExtendedGame eg = fixtures::demo_extended(4, 20.0, 4);
  IntegratorConfig cfg;
  cfg.tol = 1e-12;  // unreachable in the allowed time
  cfg.max_time = 0.05;
  const SwarmTrajectory traj = run_dynamics(eg, default_init(eg), cfg);
  REQUIRE_FALSE(traj.converged);
  REQUIRE(traj.final_time >= 0.05);
}

TEST_CASE("lyapunov value: zero at the reference, dominates the distance") {
  auto rng = oracle::rng(97);
  const ExtendedGame eg = fixtures::random_small_extended(rng, 2);
  const SwarmTrajectory traj = converge(eg, 1e-9);
  REQUIRE(traj.converged);
  const ExtendedState& star = traj.final_state;

  REQUIRE(std::abs(lyapunov_value(eg, star, star)) < 1e-8);

  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    ExtendedState s = star;
    for (int i = 0; i < eg.players(); ++i) {
      Vec zi = eg.z_block(star.z, i);
      for (Eigen::Index k = 0; k < zi.size(); ++k) zi(k) += nd(rng);
      s.z.segment(eg.z_offset(i), eg.block_size(i)) = project_omega(eg, i, zi);
      s.lambda(i) = std::abs(star.lambda(i) + nd(rng));
      s.zeta(i) = star.zeta(i) + nd(rng);
    }
    const Vec ys = detail::stack_state(s);
    const Vec yr = detail::stack_state(star);
    REQUIRE(lyapunov_value(eg, s, star) >=
            0.5 * (ys - yr).squaredNorm() - 1e-9);
  }
}

TEST_CASE("lyapunov value is nonincreasing along a converged run") {
  auto rng = oracle::rng(101);
  const ExtendedGame eg = fixtures::random_small_extended(rng, 3);
  SwarmTrajectory traj = converge(eg, 1e-7);
  REQUIRE(traj.converged);
  attach_lyapunov(eg, traj, traj.final_state);
  REQUIRE(traj.lyapunov.size() == traj.states.size());
  for (std::size_t k = 1; k < traj.lyapunov.size(); ++k)
    REQUIRE(traj.lyapunov[k] <= traj.lyapunov[k - 1] + 1e-8);
  REQUIRE(traj.lyapunov.back() <= 1e-8);
}
