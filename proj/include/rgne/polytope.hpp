#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

#include "rgne/common.hpp"
#include "rgne/ellipsoid.hpp"

namespace rgne {

/// Inscribed polytope in H-form (unit-norm facet rows A, offsets d) paired
/// with its generating vertices. 2D vertices are kept in counterclockwise
/// order so facet l joins vertex l to vertex l+1.
struct Polytope {
  Mat A;                      // q x n, unit rows
  Vec d;                      // q
  std::vector<Vec> vertices;  // on the source body's boundary

  int facet_count() const { return static_cast<int>(A.rows()); }
  int dim() const { return static_cast<int>(A.cols()); }

  double support(const Vec& u) const {
    require(!vertices.empty(), Errc::InvalidArgument, "Polytope::support: empty");
    require_dim(u, vertices.front().size(), "Polytope::support");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) best = std::max(best, u.dot(v));
    return best;
  }

  Vec arg_support(const Vec& u) const {
    require(!vertices.empty(), Errc::InvalidArgument,
            "Polytope::arg_support: empty");
    int best = 0;
    double bestval = u.dot(vertices[0]);
    for (int k = 1; k < static_cast<int>(vertices.size()); ++k) {
      const double val = u.dot(vertices[k]);
      if (val > bestval) {
        bestval = val;
        best = k;
      }
    }
    return vertices[best];
  }

  bool contains(const Vec& x, double tol = 1e-9) const {
    return ((A * x - d).array() <= tol).all();
  }

  /// Distance from x to the polytope (0 inside). 2D exact, via the boundary
  /// polyline.
  double distance(const Vec& x) const {
    require(dim() == 2, Errc::UnsupportedDimension, "Polytope::distance: 2D only");
    if (contains(x, 0.0)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    const int v = static_cast<int>(vertices.size());
    for (int k = 0; k < v; ++k)
      best = std::min(best, segment_distance(x, vertices[k], vertices[(k + 1) % v]));
    return best;
  }

  static double segment_distance(const Vec& x, const Vec& a, const Vec& b) {
    const Vec e = b - a;
    const double len2 = e.squaredNorm();
    if (len2 == 0.0) return (x - a).norm();
    const double t = std::clamp((x - a).dot(e) / len2, 0.0, 1.0);
    return (x - (a + t * e)).norm();
  }
};

/// Builds the H-form of a 2D polytope from vertices on a strictly convex
/// boundary. Vertices are sorted counterclockwise around their centroid;
/// near-coincident points are merged.
inline Polytope polytope_from_boundary_vertices(std::vector<Vec> pts) {
  for (const auto& p : pts)
    require(p.size() == 2, Errc::UnsupportedDimension,
            "polytope_from_boundary_vertices: 2D only");
  require(pts.size() >= 3, Errc::InvalidArgument,
          "polytope_from_boundary_vertices: at least 3 vertices required");

  Vec centroid = Vec::Zero(2);
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  std::sort(pts.begin(), pts.end(), [&](const Vec& a, const Vec& b) {
    return std::atan2(a(1) - centroid(1), a(0) - centroid(0)) <
           std::atan2(b(1) - centroid(1), b(0) - centroid(0));
  });
  std::vector<Vec> uniq;
  for (const auto& p : pts) {
    if (uniq.empty() || (p - uniq.back()).norm() > 1e-12) uniq.push_back(p);
  }
  if (uniq.size() > 1 && (uniq.front() - uniq.back()).norm() <= 1e-12)
    uniq.pop_back();
  require(uniq.size() >= 3, Errc::InvalidArgument,
          "polytope_from_boundary_vertices: degenerate (coincident) vertices");

  const int q = static_cast<int>(uniq.size());
  Polytope poly;
  poly.vertices = uniq;
  poly.A.resize(q, 2);
  poly.d.resize(q);
  for (int k = 0; k < q; ++k) {
    const Vec& a = uniq[k];
    const Vec& b = uniq[(k + 1) % q];
    const Vec e = b - a;
    const double len = e.norm();
    require(len > 1e-14, Errc::InvalidArgument,
            "polytope_from_boundary_vertices: zero-length edge");
    Vec n(2);
    n << e(1) / len, -e(0) / len;  // outward for CCW order
    poly.A.row(k) = n.transpose();
    poly.d(k) = n.dot(a);
  }
  return poly;
}

/// Regular inscribed v-gon: boundary points at angles phase + 2 pi k / v.
inline Polytope inscribe_regular(const SupportBody2D& body, int v,
                                 double phase = 0.0) {
  require(v >= 3, Errc::InvalidArgument, "inscribe_regular: v >= 3 required");
  std::vector<Vec> pts;
  pts.reserve(v);
  for (int k = 0; k < v; ++k)
    pts.push_back(body.boundary_point(phase + 2.0 * std::numbers::pi * k / v));
  Polytope poly = polytope_from_boundary_vertices(std::move(pts));
  require(static_cast<int>(poly.vertices.size()) == v, Errc::InvalidArgument,
          "inscribe_regular: degenerate (coincident) vertices");
  return poly;
}

inline Polytope inscribe_regular(const Ellipsoid& e, int v, double phase = 0.0) {
  return inscribe_regular(SupportBody2D::from(e), v, phase);
}

/// Greedy vertex addition: each step evaluates the support gap
/// g_M(u) - g_P(u) at every facet normal, picks the facet with the largest
/// gap (lowest index on ties) and adds the body's support point there.
/// Returns early once every gap is below 1e-12.
inline Polytope refine_by_support_gap(const SupportBody2D& body, Polytope poly,
                                      int steps) {
  require(poly.dim() == 2, Errc::UnsupportedDimension,
          "refine_by_support_gap: 2D only");
  require(steps >= 0, Errc::InvalidArgument,
          "refine_by_support_gap: steps >= 0 required");
  for (int s = 0; s < steps; ++s) {
    int best = -1;
    double best_gap = 1e-12;
    for (int l = 0; l < poly.facet_count(); ++l) {
      const Vec u = poly.A.row(l).transpose();
      const double gap = body.support(u) - poly.support(u);
      if (gap > best_gap) {
        best_gap = gap;
        best = l;
      }
    }
    if (best < 0) return poly;  // converged
    const Vec w = body.arg_support(poly.A.row(best).transpose());
    auto pts = poly.vertices;
    pts.push_back(w);
    poly = polytope_from_boundary_vertices(std::move(pts));
  }
  return poly;
}

inline Polytope refine_by_support_gap(const Ellipsoid& e, Polytope poly,
                                      int steps) {
  return refine_by_support_gap(SupportBody2D::from(e), std::move(poly), steps);
}

/// sup over the body's boundary of the distance to the polytope, evaluated on
/// a fixed grid of `samples` parameter angles. Valid for inscribed polytopes
/// (the polytope-to-body side is zero). Deterministic for fixed samples.
inline double hausdorff_to_body(const SupportBody2D& body, const Polytope& poly,
                                int samples) {
  require(samples >= 8 * poly.facet_count(), Errc::InvalidArgument,
          "hausdorff_to_body: undersampled (need >= 8 per facet)");
  double h = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec p = body.boundary_point(2.0 * std::numbers::pi * k / samples);
    h = std::max(h, poly.distance(p));
  }
  return h;
}

inline double hausdorff_to_ellipsoid(const Ellipsoid& e, const Polytope& poly,
                                     int samples) {
  return hausdorff_to_body(SupportBody2D::from(e), poly, samples);
}

inline void write_polytope(std::ostream& os, const Polytope& poly) {
  os.precision(17);
  os << poly.facet_count() << ' ' << poly.dim() << '\n';
  for (int l = 0; l < poly.facet_count(); ++l) {
    for (int k = 0; k < poly.dim(); ++k) os << poly.A(l, k) << ' ';
    os << poly.d(l) << '\n';
  }
  os << poly.vertices.size() << '\n';
  for (const auto& v : poly.vertices) {
    for (int k = 0; k < poly.dim(); ++k) os << v(k) << (k + 1 < poly.dim() ? ' ' : '\n');
  }
}

inline Polytope read_polytope(std::istream& is) {
  int q = 0, n = 0;
  require(static_cast<bool>(is >> q >> n), Errc::IoError,
          "read_polytope: bad header");
  require(q >= 1 && n >= 1, Errc::IoError, "read_polytope: bad dimensions");
  Polytope poly;
  poly.A.resize(q, n);
  poly.d.resize(q);
  for (int l = 0; l < q; ++l) {
    for (int k = 0; k < n; ++k)
      require(static_cast<bool>(is >> poly.A(l, k)), Errc::IoError,
              "read_polytope: truncated facet row");
    require(static_cast<bool>(is >> poly.d(l)), Errc::IoError,
            "read_polytope: truncated facet row");
  }
  std::size_t v = 0;
  require(static_cast<bool>(is >> v), Errc::IoError,
          "read_polytope: missing vertex count");
  poly.vertices.resize(v, Vec(n));
  for (auto& vert : poly.vertices)
    for (int k = 0; k < n; ++k)
      require(static_cast<bool>(is >> vert(k)), Errc::IoError,
              "read_polytope: truncated vertex");
  return poly;
}

}  // namespace rgne
