#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "rgne/common.hpp"

namespace rgne {

/// Axis-aligned ellipsoid { x : sum_k (x_k - c_k)^2 / v_k^2 <= 1 }.
///
/// Supports are closed-form: g(u) = c.u + ||diag(v) u||, attained at
/// c + diag(v)^2 u / ||diag(v) u||.
class Ellipsoid {
 public:
  Ellipsoid(Vec center, Vec semiaxes)
      : center_(std::move(center)), semiaxes_(std::move(semiaxes)) {
    require(center_.size() == semiaxes_.size(), Errc::DimensionMismatch,
            "Ellipsoid: center/semiaxes length mismatch");
    require((semiaxes_.array() > 0.0).all(), Errc::InvalidArgument,
            "Ellipsoid: semiaxes must be strictly positive");
  }

  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  const Vec& semiaxes() const { return semiaxes_; }

  double support(const Vec& u) const {
    require_dim(u, center_.size(), "Ellipsoid::support");
    require(u.norm() > 0.0, Errc::InvalidArgument,
            "Ellipsoid::support: zero direction");
    return center_.dot(u) + semiaxes_.cwiseProduct(u).norm();
  }

  /// Boundary point maximizing u.x over the ellipsoid.
  Vec arg_support(const Vec& u) const {
    require_dim(u, center_.size(), "Ellipsoid::arg_support");
    const double s = semiaxes_.cwiseProduct(u).norm();
    require(s > 0.0, Errc::InvalidArgument,
            "Ellipsoid::arg_support: zero direction");
    return center_ + semiaxes_.array().square().matrix().cwiseProduct(u) / s;
  }

  /// |sum (x_k - c_k)^2 / v_k^2 - 1|; zero on the boundary.
  double membership_residual(const Vec& x) const {
    require_dim(x, center_.size(), "Ellipsoid::membership_residual");
    const double q = ((x - center_).array() / semiaxes_.array()).square().sum();
    return std::abs(q - 1.0);
  }

  bool contains(const Vec& x, double tol = 0.0) const {
    require_dim(x, center_.size(), "Ellipsoid::contains");
    return ((x - center_).array() / semiaxes_.array()).square().sum() <= 1.0 + tol;
  }

  /// 2D boundary parameterization (c1 + v1 cos t, c2 + v2 sin t).
  Vec boundary_point(double angle) const {
    require(dim() == 2, Errc::UnsupportedDimension,
            "Ellipsoid::boundary_point: 2D only");
    Vec p(2);
    p << center_(0) + semiaxes_(0) * std::cos(angle),
        center_(1) + semiaxes_(1) * std::sin(angle);
    return p;
  }

  /// Maximum curvature of the 2D boundary, max(v1/v2^2, v2/v1^2).
  double max_boundary_curvature() const {
    require(dim() == 2, Errc::UnsupportedDimension,
            "Ellipsoid::max_boundary_curvature: 2D only");
    const double a = semiaxes_(0), b = semiaxes_(1);
    return std::max(a / (b * b), b / (a * a));
  }

 private:
  Vec center_, semiaxes_;
};

inline double support_ellipsoid(const Ellipsoid& e, const Vec& u) {
  return e.support(u);
}

/// Convex compact 2D body exposed through its support machinery. This is the
/// only interface the polytope construction needs, so bodies other than
/// ellipsoids can be plugged in by supplying the three callbacks.
struct SupportBody2D {
  std::function<double(const Vec&)> support;
  std::function<Vec(const Vec&)> arg_support;
  std::function<Vec(double)> boundary_point;  // monotone angle parameterization

  static SupportBody2D from(const Ellipsoid& e) {
    require(e.dim() == 2, Errc::UnsupportedDimension,
            "SupportBody2D::from: 2D ellipsoid required");
    return SupportBody2D{
        [e](const Vec& u) { return e.support(u); },
        [e](const Vec& u) { return e.arg_support(u); },
        [e](double t) { return e.boundary_point(t); }};
  }
};

}  // namespace rgne
