#pragma once

#include <array>
#include <cmath>
#include <string_view>

#include "foliata/error.hpp"

namespace foliata {

enum class ChartKind { PoincareDisk, EuclideanPlane, Stereographic };

constexpr std::string_view to_string(ChartKind k) {
  switch (k) {
    case ChartKind::PoincareDisk: return "PoincareDisk";
    case ChartKind::EuclideanPlane: return "EuclideanPlane";
    case ChartKind::Stereographic: return "Stereographic";
  }
  return "Unknown";
}

/// Conformal chart rho(u)|du|^2 of constant curvature c0. For |c0| != 1 the
/// unit models are scaled by 1/|c0|, which leaves grad log rho unchanged.
struct ChartSpace {
  ChartKind kind = ChartKind::EuclideanPlane;
  double c0 = 0.0;

  static ChartSpace for_curvature(double c0) {
    if (!std::isfinite(c0)) throw Error(ErrorCode::InvalidParams, "non-finite curvature");
    if (c0 < 0.0) return {ChartKind::PoincareDisk, c0};
    if (c0 > 0.0) return {ChartKind::Stereographic, c0};
    return {ChartKind::EuclideanPlane, 0.0};
  }

  double scale() const { return c0 == 0.0 ? 1.0 : 1.0 / std::abs(c0); }
};

struct ChartFactor {
  double rho = 1.0;
  std::array<double, 2> grad_log_rho{0.0, 0.0};
};

inline constexpr double kDiskEdge = 1.0 - 1e-12;
// Frame paths stop once a stereographic point passes this radius (the antipode
// of the chart origin is not covered).
inline constexpr double kStereoEdge = 1e6;

inline ChartFactor chart_factor(const ChartSpace& space, double u1, double u2) {
  const double r2 = u1 * u1 + u2 * u2;
  switch (space.kind) {
    case ChartKind::PoincareDisk: {
      if (!(std::sqrt(r2) < kDiskEdge))
        throw Error(ErrorCode::ChartOverflow, "chart point left the Poincaré disk");
      const double w = 1.0 - r2;
      return {4.0 * space.scale() / (w * w), {4.0 * u1 / w, 4.0 * u2 / w}};
    }
    case ChartKind::Stereographic: {
      const double w = 1.0 + r2;
      return {4.0 * space.scale() / (w * w), {-4.0 * u1 / w, -4.0 * u2 / w}};
    }
    case ChartKind::EuclideanPlane: break;
  }
  return {};
}

/// Gauss curvature of the chart metric at u by K = -(1/2 rho) Laplacian(log rho),
/// with a five-point stencil of spacing h.
inline double chart_curvature(const ChartSpace& space, double u1, double u2, double h = 1e-3) {
  auto lr = [&](double a, double b) { return std::log(chart_factor(space, a, b).rho); };
  const double lap = (lr(u1 + h, u2) + lr(u1 - h, u2) + lr(u1, u2 + h) + lr(u1, u2 - h) -
                      4.0 * lr(u1, u2)) /
                     (h * h);
  return -lap / (2.0 * chart_factor(space, u1, u2).rho);
}

/// Lift to the ambient model: hyperboloid -X0^2 + X1^2 + X2^2 = -1/|c0| in
/// R^{2,1}, the plane itself, or the sphere |p| = 1/sqrt(c0) in R^3.
inline std::array<double, 3> ambient_lift(const ChartSpace& space, double u1, double u2) {
  const double r2 = u1 * u1 + u2 * u2;
  switch (space.kind) {
    case ChartKind::PoincareDisk: {
      const double s = 1.0 / std::sqrt(std::abs(space.c0)), w = 1.0 - r2;
      return {s * (1.0 + r2) / w, s * 2.0 * u1 / w, s * 2.0 * u2 / w};
    }
    case ChartKind::Stereographic: {
      const double s = 1.0 / std::sqrt(space.c0), w = 1.0 + r2;
      return {s * 2.0 * u1 / w, s * 2.0 * u2 / w, s * (1.0 - r2) / w};
    }
    case ChartKind::EuclideanPlane: break;
  }
  return {u1, u2, 0.0};
}

/// Defect of the quadric constraint of a lifted point, in units of the model
/// radius squared: |(-X0^2 + X1^2 + X2^2)|c0| + 1| or ||p|^2 c0 - 1|.
inline double lift_constraint_defect(const ChartSpace& space, const std::array<double, 3>& p) {
  switch (space.kind) {
    case ChartKind::PoincareDisk:
      return std::abs((-p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) * std::abs(space.c0) + 1.0);
    case ChartKind::Stereographic:
      return std::abs((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) * space.c0 - 1.0);
    case ChartKind::EuclideanPlane: break;
  }
  return 0.0;
}

}  // namespace foliata
