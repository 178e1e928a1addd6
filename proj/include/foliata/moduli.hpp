#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foliata/error.hpp"

namespace foliata {

/// A point of the parameter space: ambient curvature c0 and the first-integral
/// constants c (of f) and d (of g). When c0 = 0 the separation constant is not
/// determined by (c, d) and is carried explicitly in `a`.
struct ModuliPoint {
  double c0 = -1.0;
  double c = 0.0;
  double d = 0.0;
  double a = 0.0;  // read only when c0 == 0
};

struct DerivedParams {
  double c0 = 0.0;
  double c = 0.0;
  double d = 0.0;
  double a = 0.0;
  double cbar = 0.0;  // coefficient of f^2 in the f first integral, c0 + a
  double dbar = 0.0;  // coefficient of g^2 in the g first integral, c0 - a
  double delta = 0.0;
  // Roots of X^2 + cbar X + c and Y^2 + dbar Y + d, ordered minus <= plus.
  // Present only when delta >= 0.
  std::optional<double> xminus, xplus, yminus, yplus;

  bool has_roots() const { return xplus.has_value(); }
};

enum class Region {
  OnduloidRotational,
  HelicoidS2,
  RiemannTypeS2,
  FlatVerticalAnnulus,
  GammaHelicoidalType,
  HorizontalGeodesicFoliation,
  ObliquePlane,
  CatenoidRotational,
  CatenoidEquidistant,
  GraphEquidistant,
  AnnulusFamily,
  OndulatedHelicoid,
  BlowedHelicoid,
  RiemannFamilyH2,
  ClassicalRiemannR3,
  VerticalGeodesicPlane,
  OutsideModuli,
};

constexpr std::string_view to_string(Region r) {
  switch (r) {
    case Region::OnduloidRotational: return "OnduloidRotational";
    case Region::HelicoidS2: return "HelicoidS2";
    case Region::RiemannTypeS2: return "RiemannTypeS2";
    case Region::FlatVerticalAnnulus: return "FlatVerticalAnnulus";
    case Region::GammaHelicoidalType: return "GammaHelicoidalType";
    case Region::HorizontalGeodesicFoliation: return "HorizontalGeodesicFoliation";
    case Region::ObliquePlane: return "ObliquePlane";
    case Region::CatenoidRotational: return "CatenoidRotational";
    case Region::CatenoidEquidistant: return "CatenoidEquidistant";
    case Region::GraphEquidistant: return "GraphEquidistant";
    case Region::AnnulusFamily: return "AnnulusFamily";
    case Region::OndulatedHelicoid: return "OndulatedHelicoid";
    case Region::BlowedHelicoid: return "BlowedHelicoid";
    case Region::RiemannFamilyH2: return "RiemannFamilyH2";
    case Region::ClassicalRiemannR3: return "ClassicalRiemannR3";
    case Region::VerticalGeodesicPlane: return "VerticalGeodesicPlane";
    case Region::OutsideModuli: return "OutsideModuli";
  }
  return "Unknown";
}

struct CertificateEntry {
  std::string name;
  double value = 0.0;
  bool ok = false;
};

struct RegionReport {
  Region label = Region::OutsideModuli;
  std::vector<CertificateEntry> certificate;
  DerivedParams derived;
};

struct CurvatureScale {
  int sign = 0;
  double scale = 1.0;  // sqrt(|c0|), or 1 when c0 == 0
};

inline CurvatureScale normalize_curvature(double c0) {
  if (c0 == 0.0) return {0, 1.0};
  return {c0 > 0.0 ? 1 : -1, std::sqrt(std::abs(c0))};
}

/// Zero test used for the boundary families (Gamma curve and the axes).
inline bool near_zero(double v, double scale = 1.0) {
  return std::abs(v) <= 1e-12 * std::max(1.0, std::abs(scale));
}

inline void validate(const ModuliPoint& p) {
  if (!std::isfinite(p.c0) || !std::isfinite(p.c) || !std::isfinite(p.d) || !std::isfinite(p.a))
    throw Error(ErrorCode::InvalidParams, "moduli point has a non-finite component");
  if (p.c0 == 0.0 && p.c != p.d)
    throw Error(ErrorCode::InvalidParams, "c0 = 0 requires c = d");
}

inline DerivedParams derive_params(const ModuliPoint& p) {
  validate(p);
  DerivedParams dp;
  dp.c0 = p.c0;
  dp.c = p.c;
  dp.d = p.d;
  dp.a = p.c0 != 0.0 ? (p.c - p.d) / p.c0 : p.a;
  dp.cbar = p.c0 + dp.a;
  dp.dbar = p.c0 - dp.a;
  // The two quadratics share their discriminant; the f form is the primary one.
  dp.delta = dp.cbar * dp.cbar - 4.0 * p.c;
  if (dp.delta >= 0.0) {
    const double s = std::sqrt(dp.delta);
    dp.xminus = 0.5 * (-dp.cbar - s);
    dp.xplus = 0.5 * (-dp.cbar + s);
    dp.yminus = 0.5 * (-dp.dbar - s);
    dp.yplus = 0.5 * (-dp.dbar + s);
  }
  return dp;
}

/// Discriminant of the g quadratic, dbar^2 - 4d. Agrees with `delta`.
inline double delta_from_g(const DerivedParams& dp) { return dp.dbar * dp.dbar - 4.0 * dp.d; }

namespace detail {

inline RegionReport classify_positive(const ModuliPoint& unit, const DerivedParams& dp) {
  RegionReport r;
  r.derived = dp;
  r.certificate.push_back({"c<=0", unit.c, unit.c <= 0.0 || near_zero(unit.c)});
  r.certificate.push_back({"d<=0", unit.d, unit.d <= 0.0 || near_zero(unit.d)});
  if (!r.certificate[0].ok || !r.certificate[1].ok) return r;
  const bool c_zero = near_zero(unit.c), d_zero = near_zero(unit.d);
  if (c_zero && d_zero) r.label = Region::FlatVerticalAnnulus;
  else if (c_zero) r.label = Region::OnduloidRotational;
  else if (d_zero) r.label = Region::HelicoidS2;
  else r.label = Region::RiemannTypeS2;
  return r;
}

inline RegionReport classify_by_roots(const ModuliPoint& unit, const DerivedParams& udp,
                                      const DerivedParams& dp) {
  RegionReport r;
  r.derived = dp;
  const double scale = std::max({1.0, udp.cbar * udp.cbar, std::abs(unit.c)});
  const bool delta_ok = udp.delta >= 0.0 || near_zero(udp.delta, scale);
  r.certificate.push_back({"delta>=0", udp.delta, delta_ok});
  if (!delta_ok) return r;
  const double s = std::sqrt(std::max(0.0, udp.delta));
  const double xplus = 0.5 * (-udp.cbar + s);
  const double yplus = 0.5 * (-udp.dbar + s);
  r.certificate.push_back({"xplus>=0", xplus, xplus >= 0.0 || near_zero(xplus)});
  if (!r.certificate.back().ok) return r;
  r.certificate.push_back({"yplus>=0", yplus, yplus >= 0.0 || near_zero(yplus)});
  if (!r.certificate.back().ok) return r;

  const bool c_zero = near_zero(unit.c), d_zero = near_zero(unit.d);
  if (unit.c0 == 0.0) {
    if (c_zero) r.label = Region::VerticalGeodesicPlane;
    else r.label = Region::ClassicalRiemannR3;  // c = d < 0; c = d > 0 fails yplus or xplus
    return r;
  }
  if (near_zero(udp.delta, scale)) {
    r.label = Region::GammaHelicoidalType;
  } else if (c_zero && d_zero) {
    r.label = Region::VerticalGeodesicPlane;
  } else if (d_zero) {
    r.label = unit.c > 0.0 ? Region::HorizontalGeodesicFoliation : Region::ObliquePlane;
  } else if (c_zero) {
    if (unit.d > 1.0) r.label = Region::CatenoidRotational;
    else if (unit.d > 0.0) r.label = Region::CatenoidEquidistant;
    else r.label = Region::GraphEquidistant;
  } else if (unit.c < 0.0) {
    r.label = unit.d > 0.0 ? Region::AnnulusFamily : Region::RiemannFamilyH2;
  } else {
    r.label = unit.d < 0.0 ? Region::OndulatedHelicoid : Region::BlowedHelicoid;
  }
  return r;
}

}  // namespace detail

/// Classifies a parameter point. Curvature is first scaled to sign(c0); a
/// dilation by sqrt|c0| maps (c, d) to (c, d)/c0^2. The reported derived
/// parameters are those of the unscaled point.
inline RegionReport classify(const ModuliPoint& p) {
  const DerivedParams dp = derive_params(p);
  const auto [sign, scale] = normalize_curvature(p.c0);
  const double s4 = std::pow(scale, 4);
  ModuliPoint unit{static_cast<double>(sign), p.c / s4, p.d / s4, p.a / (scale * scale)};
  if (sign > 0) return detail::classify_positive(unit, dp);
  return detail::classify_by_roots(unit, derive_params(unit), dp);
}

struct ScanRect {
  double cmin = 0.0, cmax = 1.0, dmin = 0.0, dmax = 1.0;
};

struct ScanCell {
  double c = 0.0;
  double d = 0.0;
  Region label = Region::OutsideModuli;
};

/// Labels at cell centres, row-major with d outermost.
inline std::vector<ScanCell> moduli_scan(double c0, const ScanRect& rect, std::size_t nx,
                                         std::size_t ny, double a = 0.0) {
  if (nx < 2 || ny < 2 || !(rect.cmax > rect.cmin) || !(rect.dmax > rect.dmin))
    throw Error(ErrorCode::InvalidParams, "scan rectangle must be nondegenerate with nx, ny >= 2");
  std::vector<ScanCell> cells;
  cells.reserve(nx * ny);
  const double hc = (rect.cmax - rect.cmin) / static_cast<double>(nx);
  const double hd = (rect.dmax - rect.dmin) / static_cast<double>(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double d = rect.dmin + (static_cast<double>(j) + 0.5) * hd;
    for (std::size_t i = 0; i < nx; ++i) {
      const double c = rect.cmin + (static_cast<double>(i) + 0.5) * hc;
      Region label = Region::OutsideModuli;
      // c0 = 0 only admits the diagonal; off-diagonal cells are outside.
      if (c0 != 0.0 || c == d) label = classify({c0, c, d, a}).label;
      cells.push_back({c, d, label});
    }
  }
  return cells;
}

}  // namespace foliata
