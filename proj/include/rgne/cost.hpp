#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rgne/common.hpp"

namespace rgne {

/// Per-player cost J_i over the stacked profile x = col{x_1..x_N}, plus the
/// own-block gradient grad_{x_i} J_i. Two kinds:
///
///  - demand_response: J_i = 1/2 ||x_i - w_i||^2 - x_i . p(Q(x)) with the
///    pricing p = N (1 - Q) and aggregate Q = (1/N) sum_j x_j. The closed-form
///    own gradient is 2 x_i + sum_j x_j - w_i - N 1 (checked against finite
///    differences in the tests).
///  - custom: user callbacks; without an analytic gradient a central
///    finite-difference fallback (step 1e-5 on the variable's scale) is used.
class CostModel {
 public:
  using CostFn = std::function<double(int, const Vec&)>;
  using GradFn = std::function<Vec(int, const Vec&)>;

  static CostModel demand_response(std::vector<Vec> nominal) {
    require(!nominal.empty(), Errc::InvalidArgument,
            "CostModel::demand_response: empty nominal list");
    const int n = static_cast<int>(nominal.front().size());
    for (const auto& w : nominal)
      require_dim(w, n, "CostModel::demand_response nominal");
    CostModel m;
    m.block_dim_ = n;
    m.nominal_ = std::move(nominal);
    m.has_grad_ = true;
    return m;
  }

  static CostModel custom(int block_dim, CostFn cost, GradFn grad = nullptr) {
    require(block_dim > 0, Errc::InvalidArgument,
            "CostModel::custom: positive block dimension required");
    require(static_cast<bool>(cost), Errc::InvalidArgument,
            "CostModel::custom: cost callback required");
    CostModel m;
    m.block_dim_ = block_dim;
    m.cost_ = std::move(cost);
    m.grad_ = std::move(grad);
    m.has_grad_ = static_cast<bool>(m.grad_);
    return m;
  }

  int block_dim() const { return block_dim_; }
  bool is_demand_response() const { return !nominal_.empty(); }
  bool has_analytic_gradient() const { return has_grad_; }
  const std::vector<Vec>& nominal() const { return nominal_; }

  double cost(int i, const Vec& profile) const {
    check_profile(i, profile);
    if (is_demand_response()) {
      const int n = block_dim_;
      const auto N = static_cast<double>(profile.size() / n);
      const Vec xi = profile.segment(i * n, n);
      const Vec q = aggregate(profile);
      const Vec p = N * (Vec::Ones(n) - q);
      return 0.5 * (xi - nominal_[i]).squaredNorm() - xi.dot(p);
    }
    return cost_(i, profile);
  }

  /// grad_{x_i} J_i(x). For custom models without a gradient this falls back
  /// to central differences; `used_fallback`, when given, reports that.
  Vec own_gradient(int i, const Vec& profile, bool* used_fallback = nullptr) const {
    check_profile(i, profile);
    if (used_fallback) *used_fallback = false;
    const int n = block_dim_;
    if (is_demand_response()) {
      const auto N = static_cast<double>(profile.size() / n);
      Vec sum = Vec::Zero(n);
      for (Eigen::Index j = 0; j < profile.size() / n; ++j)
        sum += profile.segment(j * n, n);
      return 2.0 * profile.segment(i * n, n) + sum - nominal_[i] -
             N * Vec::Ones(n);
    }
    if (grad_) return grad_(i, profile);
    if (used_fallback) *used_fallback = true;
    return fd_gradient(i, profile);
  }

  Vec aggregate(const Vec& profile) const {
    const int n = block_dim_;
    const Eigen::Index N = profile.size() / n;
    Vec q = Vec::Zero(n);
    for (Eigen::Index j = 0; j < N; ++j) q += profile.segment(j * n, n);
    return q / static_cast<double>(N);
  }

 private:
  CostModel() = default;

  void check_profile(int i, const Vec& profile) const {
    require(profile.size() % block_dim_ == 0, Errc::DimensionMismatch,
            "CostModel: profile length not a multiple of the block dimension");
    const Eigen::Index N = profile.size() / block_dim_;
    require(i >= 0 && i < N, Errc::InvalidArgument,
            "CostModel: player index out of range");
    if (is_demand_response())
      require(N == static_cast<Eigen::Index>(nominal_.size()),
              Errc::DimensionMismatch,
              "CostModel: profile player count != nominal count");
  }

  Vec fd_gradient(int i, const Vec& profile) const {
    const int n = block_dim_;
    Vec g(n);
    Vec x = profile;
    for (int k = 0; k < n; ++k) {
      const Eigen::Index idx = static_cast<Eigen::Index>(i) * n + k;
      const double h = 1e-5 * std::max(1.0, std::abs(profile(idx)));
      x(idx) = profile(idx) + h;
      const double fp = cost_(i, x);
      x(idx) = profile(idx) - h;
      const double fm = cost_(i, x);
      x(idx) = profile(idx);
      g(k) = (fp - fm) / (2.0 * h);
    }
    return g;
  }

  int block_dim_ = 0;
  bool has_grad_ = false;
  std::vector<Vec> nominal_;
  CostFn cost_;
  GradFn grad_;
};

}  // namespace rgne
