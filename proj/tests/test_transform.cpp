#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rgne/extended_game.hpp"
#include "rgne/game.hpp"
#include "rgne/polytope.hpp"

using namespace rgne;
using Catch::Approx;

namespace {

Ellipsoid demo_ellipse() {
  Vec c(2), v(2);
  c << 2.0, 2.0;
  v << 3.0, 2.0;
  return Ellipsoid(c, v);
}

UncertainGame small_game(int players, double budget = 50.0) {
  std::vector<Box> boxes(players, Box::cube(2, -15.0, 20.0));
  std::vector<Vec> nominal;
  for (int i = 1; i <= players; ++i)
    nominal.push_back(Vec::Constant(2, static_cast<double>(5 - i)));
  std::vector<Ellipsoid> unc(players, demo_ellipse());
  return UncertainGame(boxes, CostModel::demand_response(nominal), unc, budget,
                       CommGraph::ring(players));
}

ExtendedGame square_extended(int players = 1, double budget = 50.0) {
  const UncertainGame game = small_game(players, budget);
  std::vector<Polytope> polys(players, inscribe_regular(demo_ellipse(), 4, 0.0));
  return build_extended_game(game, polys);
}

struct RandomInstance {
  Ellipsoid ellipse;
  Box box;
  Polytope poly;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uc(-2.0, 2.0);
  std::uniform_real_distribution<double> uv(0.5, 3.0);
  std::uniform_real_distribution<double> uphase(0.0, 3.0);
  std::uniform_int_distribution<int> uq(3, 8);
  Vec c(2), v(2);
  c << uc(rng), uc(rng);
  v << uv(rng), uv(rng);
  Ellipsoid e(c, v);
  Box box(Vec::Constant(2, -3.0 + uc(rng)), Vec::Constant(2, 3.0 + uv(rng)));
  Polytope p = inscribe_regular(e, uq(rng), uphase(rng));
  return {std::move(e), std::move(box), std::move(p)};
}

}  // namespace

TEST_CASE("extended game block shapes") {
  const ExtendedGame eg = square_extended();
  REQUIRE(eg.B(0).size() == 6);
  REQUIRE(eg.C(0).rows() == 2);
  REQUIRE(eg.C(0).cols() == 6);
  REQUIRE((eg.C(0).leftCols(2) + Mat::Identity(2, 2)).cwiseAbs().maxCoeff() ==
          0.0);
  REQUIRE(eg.B(0).head(2).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((eg.B(0).tail(4) - eg.polytope(0).d).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(eg.z_size() == 6);
}

TEST_CASE("equal budget split sums exactly") {
  const ExtendedGame eg = square_extended(10, 37.25);
  REQUIRE(eg.budget_split().sum() == Approx(37.25).margin(1e-12));
  REQUIRE(eg.budget_split().size() == 10);
  for (int i = 0; i < 10; ++i)
    REQUIRE(eg.budget_share(i) == Approx(3.725).margin(1e-12));
}

TEST_CASE("custom budget split must sum to the budget") {
  const UncertainGame game = small_game(2);
  std::vector<Polytope> polys(2, inscribe_regular(demo_ellipse(), 4, 0.0));
  Vec bad(2);
  bad << 10.0, 10.0;  // game budget is 50
  REQUIRE_THROWS_AS(
      build_extended_game(game, polys, BudgetSplit::Custom, bad), Error);
  Vec good(2);
  good << 20.0, 30.0;
  const ExtendedGame eg =
      build_extended_game(game, polys, BudgetSplit::Custom, good);
  REQUIRE(eg.budget_share(1) == 30.0);
}

TEST_CASE("empty polytope is rejected") {
  const UncertainGame game = small_game(1);
  Polytope empty;
  empty.A.resize(0, 2);
  empty.d.resize(0);
  REQUIRE_THROWS_AS(build_extended_game(game, {empty}), Error);
}

TEST_CASE("LP duality: dual value equals the vertex maximum on box boundary") {
  const Polytope p = inscribe_regular(demo_ellipse(), 5, 0.2);
  const Box box = Box::cube(2, -15.0, 20.0);
  auto rng = oracle::rng(41);
  std::uniform_int_distribution<int> side(0, 1), which(0, 1);
  for (int t = 0; t < 20; ++t) {
    Vec x = oracle::random_in_box(box, rng);
    // push one coordinate to a bound
    const int k = which(rng);
    x(k) = side(rng) ? box.upper()(k) : box.lower()(k);

    const auto lp = oracle::lp_min_dual(p.A, p.d, x);
    REQUIRE(lp.has_value());
    double vmax = -1e300;
    for (const auto& v : p.vertices) vmax = std::max(vmax, v.dot(x));
    REQUIRE(*lp == Approx(vmax).margin(1e-8 * std::max(1.0, std::abs(vmax))));
  }
}

TEST_CASE("weak duality holds at Omega-feasible points") {
  const ExtendedGame eg = square_extended(3);
  auto rng = oracle::rng(43);
  std::normal_distribution<double> nd(0.0, 5.0);
  for (int t = 0; t < 30; ++t) {
    for (int i = 0; i < 3; ++i) {
      Vec z(6);
      for (int k = 0; k < 6; ++k) z(k) = nd(rng);
      const Vec zi = project_omega(eg, i, z);
      const Vec xi = eg.x_of(zi, i);
      const double dual = eg.B(i).dot(zi);
      double vmax = -1e300;
      for (const auto& v : eg.polytope(i).vertices)
        vmax = std::max(vmax, v.dot(xi));
      REQUIRE(dual >= vmax - 1e-7);
    }
  }
}

TEST_CASE("extended pseudo-gradient: zero sigma blocks, game x blocks") {
  const ExtendedGame eg = square_extended(3);
  auto rng = oracle::rng(47);
  Vec z(eg.z_size());
  std::normal_distribution<double> nd(0.0, 3.0);
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = nd(rng);

  const Vec g = extended_pseudo_gradient(eg, z);
  const Vec base = eg.base().pseudo_gradient(eg.x_profile(z));
  for (int i = 0; i < 3; ++i) {
    const Vec gi = g.segment(eg.z_offset(i), eg.block_size(i));
    REQUIRE(gi.tail(eg.facet_count(i)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((gi.head(2) - base.segment(2 * i, 2)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("extended pseudo-gradient is monotone in z (flat in sigma)") {
  const ExtendedGame eg = square_extended(3);
  auto rng = oracle::rng(53);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    Vec za(eg.z_size()), zb(eg.z_size());
    for (Eigen::Index k = 0; k < za.size(); ++k) {
      za(k) = nd(rng);
      zb(k) = nd(rng);
    }
    const double inner =
        (extended_pseudo_gradient(eg, za) - extended_pseudo_gradient(eg, zb))
            .dot(za - zb);
    REQUIRE(inner >= -1e-10);

    // sigma directions are flat
    Vec zc = za;
    zc.segment(eg.z_offset(0) + 2, eg.facet_count(0)).array() += 1.5;
    REQUIRE((extended_pseudo_gradient(eg, zc) - extended_pseudo_gradient(eg, za))
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }
}

TEST_CASE("projectOmega returns feasible inputs unchanged") {
  const ExtendedGame eg = square_extended();
  // assemble a feasible point: sigma >= 0 and x = A^T sigma inside the box
  Vec sigma(4);
  sigma << 0.3, 0.1, 0.0, 0.2;
  const Vec x = eg.polytope(0).A.transpose() * sigma;
  REQUIRE(eg.base().box(0).contains(x));
  Vec z(6);
  z << x, sigma;
  const Vec out = project_omega(eg, 0, z);
  REQUIRE((out - z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the origin is Omega-feasible when the box contains it") {
  const ExtendedGame eg = square_extended();
  const Vec out = project_omega(eg, 0, Vec::Zero(6));
  REQUIRE(out.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projectOmega matches the brute-force QP oracle") {
  auto rng = oracle::rng(59);
  std::normal_distribution<double> nd(0.0, 4.0);
  for (int inst = 0; inst < 10; ++inst) {
    const RandomInstance ri = random_instance(rng);
    std::vector<Box> boxes{ri.box};
    std::vector<Vec> nominal{Vec::Zero(2)};
    const UncertainGame game(boxes, CostModel::demand_response(nominal),
                             {ri.ellipse}, 100.0, CommGraph::ring(1));
    const ExtendedGame eg = build_extended_game(game, {ri.poly});
    const int m = 2 + ri.poly.facet_count();
    for (int t = 0; t < 5; ++t) {
      Vec z0(m);
      for (int k = 0; k < m; ++k) z0(k) = nd(rng);
      const Vec mine = project_omega(eg, 0, z0);
      const auto exact = oracle::qp_project(ri.box, ri.poly.A, z0);
      REQUIRE(exact.has_value());
      REQUIRE((mine - *exact).norm() < 1e-7);
    }
  }
}

TEST_CASE("projectOmega is nonexpansive") {
  const ExtendedGame eg = square_extended();
  auto rng = oracle::rng(61);
  std::normal_distribution<double> nd(0.0, 10.0);
  for (int t = 0; t < 100; ++t) {
    Vec a(6), b(6);
    for (int k = 0; k < 6; ++k) {
      a(k) = nd(rng);
      b(k) = nd(rng);
    }
    const Vec pa = project_omega(eg, 0, a);
    const Vec pb = project_omega(eg, 0, b);
    REQUIRE((pa - pb).norm() <= (a - b).norm() + 1e-9);
  }
}

TEST_CASE("identical inputs produce bit-identical matrices") {
  const ExtendedGame a = square_extended(3);
  const ExtendedGame b = square_extended(3);
  std::stringstream sa, sb;
  dump_extended_game(sa, a);
  dump_extended_game(sb, b);
  REQUIRE(sa.str() == sb.str());
  REQUIRE(!sa.str().empty());
}
