#pragma once

#include <utility>

#include "rgne/common.hpp"

namespace rgne {

/// Axis-aligned box [lower, upper], the local action set of one player.
class Box {
 public:
  Box(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    require(lower_.size() == upper_.size(), Errc::DimensionMismatch,
            "Box: lower/upper length mismatch");
    require((lower_.array() <= upper_.array()).all(), Errc::InvalidArgument,
            "Box: lower > upper in some component");
  }

  static Box cube(int dim, double lo, double hi) {
    return Box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  Vec center() const { return 0.5 * (lower_ + upper_); }

  Vec project(const Vec& x) const {
    require_dim(x, lower_.size(), "Box::project");
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  bool contains(const Vec& x, double tol = 0.0) const {
    require_dim(x, lower_.size(), "Box::contains");
    return (x.array() >= lower_.array() - tol).all() &&
           (x.array() <= upper_.array() + tol).all();
  }

 private:
  Vec lower_, upper_;
};

inline Vec project_box(const Vec& x, const Box& box) { return box.project(x); }

}  // namespace rgne
