#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "rgne/box.hpp"
#include "rgne/common.hpp"
#include "rgne/cost.hpp"
#include "rgne/ellipsoid.hpp"
#include "rgne/graph.hpp"

namespace rgne {

/// N-player game with a shared budget constraint whose weight vectors are
/// only known to lie in per-player ellipsoids. The worst-case coupled
/// constraint is  sum_i max_{w in M_i} w.x_i <= b.
class UncertainGame {
 public:
  UncertainGame(std::vector<Box> boxes, CostModel cost,
                std::vector<Ellipsoid> uncertainty, double budget,
                CommGraph graph)
      : boxes_(std::move(boxes)),
        cost_(std::move(cost)),
        uncertainty_(std::move(uncertainty)),
        budget_(budget),
        graph_(std::move(graph)) {
    require(!boxes_.empty(), Errc::InvalidArgument, "UncertainGame: no players");
    players_ = static_cast<int>(boxes_.size());
    dim_ = boxes_.front().dim();
    require(static_cast<int>(uncertainty_.size()) == players_,
            Errc::DimensionMismatch,
            "UncertainGame: one uncertainty set per player required");
    for (const auto& b : boxes_)
      require(b.dim() == dim_, Errc::DimensionMismatch,
              "UncertainGame: inconsistent box dimensions");
    for (const auto& e : uncertainty_)
      require(e.dim() == dim_, Errc::DimensionMismatch,
              "UncertainGame: inconsistent uncertainty dimensions");
    require(cost_.block_dim() == dim_, Errc::DimensionMismatch,
            "UncertainGame: cost block dimension mismatch");
    require(graph_.size() == players_, Errc::DimensionMismatch,
            "UncertainGame: graph node count != player count");
    slater_ok_ = check_slater();
  }

  int players() const { return players_; }
  int dim() const { return dim_; }
  double budget() const { return budget_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  const Box& box(int i) const { return boxes_.at(i); }
  const CostModel& cost() const { return cost_; }
  const std::vector<Ellipsoid>& uncertainty() const { return uncertainty_; }
  const Ellipsoid& uncertainty(int i) const { return uncertainty_.at(i); }
  const CommGraph& graph() const { return graph_; }

  /// False means no strictly feasible interior point was found numerically;
  /// construction still succeeds (infeasible instances are allowed for study).
  bool slater_ok() const { return slater_ok_; }

  Eigen::Index profile_size() const {
    return static_cast<Eigen::Index>(players_) * dim_;
  }

  Vec block(const Vec& profile, int i) const {
    require_dim(profile, profile_size(), "UncertainGame::block profile");
    return profile.segment(static_cast<Eigen::Index>(i) * dim_, dim_);
  }

  /// sum_i g_{M_i}(x_i), with zero blocks contributing 0.
  double worst_case_lhs(const Vec& profile) const {
    require_dim(profile, profile_size(), "UncertainGame::worst_case_lhs");
    double total = 0.0;
    for (int i = 0; i < players_; ++i) {
      const Vec xi = block(profile, i);
      if (xi.norm() == 0.0) continue;
      total += uncertainty_[i].support(xi);
    }
    return total;
  }

  /// Stacked col{grad_{x_i} J_i(x)}.
  Vec pseudo_gradient(const Vec& profile) const {
    require_dim(profile, profile_size(), "UncertainGame::pseudo_gradient");
    Vec f(profile_size());
    for (int i = 0; i < players_; ++i)
      f.segment(static_cast<Eigen::Index>(i) * dim_, dim_) =
          cost_.own_gradient(i, profile);
    return f;
  }

  Vec project_boxes(const Vec& profile) const {
    require_dim(profile, profile_size(), "UncertainGame::project_boxes");
    Vec out(profile.size());
    for (int i = 0; i < players_; ++i)
      out.segment(static_cast<Eigen::Index>(i) * dim_, dim_) =
          boxes_[i].project(block(profile, i));
    return out;
  }

 private:
  // The coupled constraint decouples across players once each x_i is chosen
  // independently, so minimizing per-player support over each box and summing
  // gives the least achievable left-hand side.
  bool check_slater() const {
    double total = 0.0;
    for (int i = 0; i < players_; ++i)
      total += min_support_over_box(uncertainty_[i], boxes_[i]);
    return total < budget_;
  }

  static double min_support_over_box(const Ellipsoid& e, const Box& box) {
    Vec x = box.center();
    double best = support_or_zero(e, x);
    // projected subgradient with diminishing steps; a diagnostic, not a solver
    const double scale =
        std::max(1.0, (box.upper() - box.lower()).cwiseAbs().maxCoeff());
    for (int k = 0; k < 400; ++k) {
      Vec sub = e.center();
      const Vec dx = e.semiaxes().array().square().matrix().cwiseProduct(x);
      const double s = e.semiaxes().cwiseProduct(x).norm();
      if (s > 0.0) sub += dx / s;
      x = box.project(x - (scale / (1.0 + k)) * sub);
      best = std::min(best, support_or_zero(e, x));
    }
    return best;
  }

  static double support_or_zero(const Ellipsoid& e, const Vec& x) {
    return x.norm() == 0.0 ? 0.0 : e.support(x);
  }

  std::vector<Box> boxes_;
  CostModel cost_;
  std::vector<Ellipsoid> uncertainty_;
  double budget_;
  CommGraph graph_;
  int players_ = 0;
  int dim_ = 0;
  bool slater_ok_ = true;
};

}  // namespace rgne
