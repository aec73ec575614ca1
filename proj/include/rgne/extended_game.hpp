#pragma once

#include <cmath>
#include <ostream>
#include <utility>
#include <vector>

#include "rgne/common.hpp"
#include "rgne/game.hpp"
#include "rgne/polytope.hpp"

namespace rgne {

enum class BudgetSplit { Equal, Custom };

/// The certain resource-allocation game obtained by dualizing the polytope
/// worst case. Per player, z_i = col{x_i, sigma_i} with sigma_i >= 0 dual to
/// the q_i facets; B_i = [0_n^T, d_i^T] turns the budget share into
/// B_i z_i <= b_i, and C_i = [-I_n, A_i^T] encodes A_i^T sigma_i = x_i.
///
/// Note: sigma >= 0 is enforced as part of Omega_i. Without it d^T sigma is
/// unbounded below and the dual transform degenerates.
class ExtendedGame {
 public:
  ExtendedGame(UncertainGame game, std::vector<Polytope> polys, Vec budget_split)
      : game_(std::move(game)),
        polys_(std::move(polys)),
        b_split_(std::move(budget_split)) {
    const int N = game_.players();
    const int n = game_.dim();
    require(static_cast<int>(polys_.size()) == N, Errc::DimensionMismatch,
            "ExtendedGame: one polytope per player required");
    require_dim(b_split_, N, "ExtendedGame budget split");
    require(std::abs(b_split_.sum() - game_.budget()) <=
                1e-9 * std::max(1.0, std::abs(game_.budget())),
            Errc::InvalidArgument,
            "ExtendedGame: budget split does not sum to the budget");

    offsets_.assign(N + 1, 0);
    B_.reserve(N);
    C_.reserve(N);
    gram_llt_.reserve(N);
    for (int i = 0; i < N; ++i) {
      const Polytope& p = polys_[i];
      require(p.facet_count() > 0, Errc::InvalidArgument,
              "ExtendedGame: polytope with no facets");
      require(p.dim() == n, Errc::DimensionMismatch,
              "ExtendedGame: polytope dimension mismatch");
      for (const auto& vtx : p.vertices)
        require(game_.uncertainty(i).membership_residual(vtx) < 1e-6,
                Errc::InvalidArgument,
                "ExtendedGame: polytope vertex off the uncertainty boundary");
      const int q = p.facet_count();
      Vec B = Vec::Zero(n + q);
      B.tail(q) = p.d;
      Mat C(n, n + q);
      C.leftCols(n) = -Mat::Identity(n, n);
      C.rightCols(q) = p.A.transpose();
      B_.push_back(std::move(B));
      C_.push_back(std::move(C));
      gram_llt_.emplace_back(Mat(Mat::Identity(n, n) +
                                 p.A.transpose() * p.A));
      offsets_[i + 1] = offsets_[i] + n + q;
    }
  }

  const UncertainGame& base() const { return game_; }
  const std::vector<Polytope>& polytopes() const { return polys_; }
  const Polytope& polytope(int i) const { return polys_.at(i); }
  int players() const { return game_.players(); }
  int dim() const { return game_.dim(); }
  int facet_count(int i) const { return polys_.at(i).facet_count(); }
  const Vec& budget_split() const { return b_split_; }
  double budget_share(int i) const { return b_split_(i); }
  const Vec& B(int i) const { return B_.at(i); }
  const Mat& C(int i) const { return C_.at(i); }

  Eigen::Index z_size() const { return offsets_.back(); }
  Eigen::Index z_offset(int i) const { return offsets_.at(i); }
  Eigen::Index block_size(int i) const { return offsets_.at(i + 1) - offsets_.at(i); }

  Vec z_block(const Vec& z, int i) const {
    require_dim(z, z_size(), "ExtendedGame::z_block");
    return z.segment(offsets_[i], block_size(i));
  }

  Vec x_of(const Vec& z_i, int i) const {
    require_dim(z_i, block_size(i), "ExtendedGame::x_of");
    return z_i.head(dim());
  }

  Vec sigma_of(const Vec& z_i, int i) const {
    require_dim(z_i, block_size(i), "ExtendedGame::sigma_of");
    return z_i.tail(facet_count(i));
  }

  /// Stacked x-profile embedded in z.
  Vec x_profile(const Vec& z) const {
    require_dim(z, z_size(), "ExtendedGame::x_profile");
    Vec x(game_.profile_size());
    for (int i = 0; i < players(); ++i)
      x.segment(static_cast<Eigen::Index>(i) * dim(), dim()) =
          z.segment(offsets_[i], dim());
    return x;
  }

  /// B_i z_i per player, stacked into an N-vector.
  Vec budget_usage(const Vec& z) const {
    Vec u(players());
    for (int i = 0; i < players(); ++i) u(i) = B_[i].dot(z_block(z, i));
    return u;
  }

  /// ||C_i z_i|| per player, i.e. the A^T sigma = x residual.
  double omega_residual(const Vec& z) const {
    double r = 0.0;
    for (int i = 0; i < players(); ++i) {
      const Vec zi = z_block(z, i);
      r = std::max(r, (C_[i] * zi).cwiseAbs().maxCoeff());
      const Vec xi = x_of(zi, i);
      const Vec si = sigma_of(zi, i);
      r = std::max(r, (xi - game_.box(i).project(xi)).cwiseAbs().maxCoeff());
      if (si.size() > 0) r = std::max(r, std::max(0.0, -si.minCoeff()));
    }
    return r;
  }

 private:
  UncertainGame game_;
  std::vector<Polytope> polys_;
  Vec b_split_;
  std::vector<Eigen::Index> offsets_;
  std::vector<Vec> B_;
  std::vector<Mat> C_;

 public:
  // Cholesky of C_i C_i^T = I + A_i^T A_i, used by the affine projection.
  const Eigen::LLT<Mat>& gram_llt(int i) const { return gram_llt_.at(i); }

 private:
  std::vector<Eigen::LLT<Mat>> gram_llt_;
};

inline ExtendedGame build_extended_game(UncertainGame game,
                                        std::vector<Polytope> polys,
                                        BudgetSplit split = BudgetSplit::Equal,
                                        Vec weights = Vec()) {
  const int N = game.players();
  Vec b_split;
  if (split == BudgetSplit::Equal) {
    b_split = Vec::Constant(N, game.budget() / N);
  } else {
    require_dim(weights, N, "build_extended_game custom weights");
    require(std::abs(weights.sum() - game.budget()) <=
                1e-9 * std::max(1.0, std::abs(game.budget())),
            Errc::InvalidArgument,
            "build_extended_game: custom weights must sum to the budget");
    b_split = weights;
  }
  return ExtendedGame(std::move(game), std::move(polys), std::move(b_split));
}

/// Full algorithm state: stacked z, multipliers lambda >= 0, consensus
/// auxiliaries zeta.
struct ExtendedState {
  Vec z;
  Vec lambda;
  Vec zeta;
};

/// col{grad_{x_i} J_i, 0_{q_i}} stacked over players.
inline Vec extended_pseudo_gradient(const ExtendedGame& eg, const Vec& z) {
  const Vec x = eg.x_profile(z);
  Vec g = Vec::Zero(eg.z_size());
  for (int i = 0; i < eg.players(); ++i)
    g.segment(eg.z_offset(i), eg.dim()) = eg.base().cost().own_gradient(i, x);
  return g;
}

struct DykstraOptions {
  int max_iters = 500;
  double move_tol = 1e-11;
  double residual_tol = 1e-9;
};

/// Euclidean projection of z_i onto
///   Omega_i = { (x, sigma) : x in Theta_i, sigma >= 0, A_i^T sigma = x },
/// by Dykstra's alternating projections between the affine set {C_i z = 0}
/// and the box-times-orthant set. The returned point satisfies the box and
/// orthant constraints exactly and the affine residual below residual_tol.
inline Vec project_omega(const ExtendedGame& eg, int i, const Vec& z_i,
                         const DykstraOptions& opts = {}) {
  require_dim(z_i, eg.block_size(i), "project_omega");
  const int n = eg.dim();
  const int q = eg.facet_count(i);
  const Mat& C = eg.C(i);
  const Box& box = eg.base().box(i);

  auto clamp_set = [&](const Vec& v) {
    Vec out(v.size());
    out.head(n) = box.project(v.head(n));
    out.tail(q) = v.tail(q).cwiseMax(0.0);
    return out;
  };
  auto affine = [&](const Vec& v) -> Vec {
    return v - C.transpose() * eg.gram_llt(i).solve(C * v);
  };

  {
    const Vec cz = C * z_i;
    if (cz.cwiseAbs().maxCoeff() <= opts.residual_tol &&
        (clamp_set(z_i) - z_i).cwiseAbs().maxCoeff() == 0.0)
      return z_i;
  }

  Vec y = z_i;
  Vec p = Vec::Zero(z_i.size());
  Vec r = Vec::Zero(z_i.size());
  Vec prev = y;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Vec a = affine(y + p);
    p = y + p - a;
    const Vec b = clamp_set(a + r);
    r = a + r - b;
    const double move = (b - prev).norm();
    const double resid = (C * b).cwiseAbs().maxCoeff();
    if (move < opts.move_tol && resid <= opts.residual_tol) return b;
    prev = b;
    y = b;
  }
  throw Error(Errc::NotConverged,
              "project_omega: Dykstra iteration cap reached",
              (C * prev).cwiseAbs().maxCoeff());
}

/// Matrices and dimensions in a plain-text block per player, for golden tests.
inline void dump_extended_game(std::ostream& os, const ExtendedGame& eg) {
  os.precision(17);
  os << eg.players() << ' ' << eg.dim() << '\n';
  for (int i = 0; i < eg.players(); ++i) {
    os << i << ' ' << eg.facet_count(i) << ' ' << eg.budget_share(i) << '\n';
    for (Eigen::Index k = 0; k < eg.B(i).size(); ++k)
      os << eg.B(i)(k) << (k + 1 < eg.B(i).size() ? ' ' : '\n');
    const Mat& C = eg.C(i);
    for (Eigen::Index row = 0; row < C.rows(); ++row)
      for (Eigen::Index col = 0; col < C.cols(); ++col)
        os << C(row, col) << (col + 1 < C.cols() ? ' ' : '\n');
  }
}

}  // namespace rgne
