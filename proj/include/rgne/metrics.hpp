#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "rgne/common.hpp"
#include "rgne/ellipsoid.hpp"
#include "rgne/polytope.hpp"

namespace rgne {

/// Approximation quality of one player's inscribed polytope.
struct ApproxMetrics {
  double hausdorff = 0.0;           // h_i
  double max_angle = 0.0;           // theta_i = max over facets
  std::vector<double> facet_angles; // tau per facet of the finer polytope
  double curvature = 0.0;           // nu_i (boundary-curvature convention)
  int facet_count = 0;              // q_i
};

/// Per-facet angles between two H-form polytopes: every facet normal of the
/// finer polytope is matched to the nearest normal of the coarser one.
/// Returns (tau list, theta = max tau).
inline std::pair<std::vector<double>, double> angular_metric(
    const Polytope& a, const Polytope& b) {
  require(a.facet_count() > 0 && b.facet_count() > 0, Errc::InvalidArgument,
          "angular_metric: empty polytope");
  require(a.dim() == b.dim(), Errc::DimensionMismatch,
          "angular_metric: dimension mismatch");
  const Polytope& fine = a.facet_count() >= b.facet_count() ? a : b;
  const Polytope& coarse = a.facet_count() >= b.facet_count() ? b : a;
  std::vector<double> taus(fine.facet_count());
  double theta = 0.0;
  for (int l = 0; l < fine.facet_count(); ++l) {
    double best = std::numbers::pi;
    for (int j = 0; j < coarse.facet_count(); ++j) {
      const double c =
          std::clamp(fine.A.row(l).dot(coarse.A.row(j)), -1.0, 1.0);
      best = std::min(best, std::acos(c));
    }
    taus[l] = best;
    theta = std::max(theta, best);
  }
  return {std::move(taus), theta};
}

/// h, theta (against a reference polytope, e.g. a much finer polygon of the
/// same body), q and the curvature convention, bundled for the delta bound.
inline ApproxMetrics approx_metrics(const Ellipsoid& e, const Polytope& poly,
                                    const Polytope& reference,
                                    int hausdorff_samples = 8192) {
  ApproxMetrics m;
  m.facet_count = poly.facet_count();
  m.hausdorff = hausdorff_to_ellipsoid(e, poly, hausdorff_samples);
  auto [taus, theta] = angular_metric(poly, reference);
  m.facet_angles = std::move(taus);
  m.max_angle = theta;
  m.curvature = e.max_boundary_curvature();
  return m;
}

/// delta = r sum_i q_i c_i theta_i, and the Hausdorff-curvature variant
/// r sum_i q_i c_i / sqrt(2/(h_i nu_i) - 1). The latter is vacuous (absent)
/// whenever some h_i nu_i >= 2.
struct DeltaBound {
  double angular = 0.0;
  std::optional<double> hausdorff;
  bool hausdorff_available = false;
};

inline DeltaBound delta_bound(std::span<const ApproxMetrics> metrics, double r,
                              std::span<const double> c) {
  require(r > 0.0, Errc::InvalidArgument, "delta_bound: r > 0 required");
  require(metrics.size() == c.size(), Errc::DimensionMismatch,
          "delta_bound: one constant per player required");
  double ang = 0.0, haus = 0.0;
  bool haus_ok = true;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& m = metrics[i];
    require(m.max_angle >= 0.0 && m.max_angle < std::numbers::pi / 2,
            Errc::InvalidArgument, "delta_bound: theta outside [0, pi/2)");
    ang += m.facet_count * c[i] * m.max_angle;
    const double hv = m.hausdorff * m.curvature;
    if (hv >= 2.0) {
      haus_ok = false;
    } else if (hv > 0.0) {
      haus += m.facet_count * c[i] / std::sqrt(2.0 / hv - 1.0);
    }
  }
  DeltaBound out;
  out.angular = r * ang;
  out.hausdorff_available = haus_ok;
  if (haus_ok) out.hausdorff = r * haus;
  return out;
}

}  // namespace rgne
