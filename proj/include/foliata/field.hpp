#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "foliata/error.hpp"
#include "foliata/grid.hpp"
#include "foliata/moduli.hpp"
#include "foliata/profile.hpp"

namespace foliata {

inline constexpr double kDenominatorEps = 1e-9;
inline constexpr double kOverflowGuard = 1e8;

enum class Provenance { Reconstructed, Degenerate, Relaxation };

constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Reconstructed: return "Reconstructed";
    case Provenance::Degenerate: return "Degenerate";
    case Provenance::Relaxation: return "Relaxation";
  }
  return "Unknown";
}

/// omega and its exact first derivatives at a point.
struct OmegaSample {
  double omega = 0.0;
  double omega_x = 0.0;
  double omega_y = 0.0;
};

/// Closed-form evaluator of omega off the grid. Returns nullopt on the
/// singular set.
class OmegaSource {
 public:
  virtual ~OmegaSource() = default;
  virtual std::optional<OmegaSample> sample(double x, double y) const = 0;
};

namespace detail {

/// sinh(omega) from the profile values, falling back to the second form when
/// the primary denominator c0 + f^2 + g^2 vanishes.
inline std::optional<double> reconstruct_sinh(double c0, double a, double f, double fx, double g,
                                              double gy) {
  const double den = c0 + f * f + g * g;
  double s;
  if (std::abs(den) > kDenominatorEps) {
    s = (fx + gy) / den;
  } else if (std::abs(fx - gy) > kDenominatorEps) {
    s = (g * g - f * f - a) / (fx - gy);
  } else {
    return std::nullopt;
  }
  if (!(std::abs(s) <= kOverflowGuard)) return std::nullopt;
  return s;
}

}  // namespace detail

/// omega rebuilt from a pair of profile solutions; since f = -omega_x/cosh
/// and g = -omega_y/cosh, the gradient is exact as well.
class ProfileSource final : public OmegaSource {
 public:
  ProfileSource(ProfileSolution f, ProfileSolution g) : f_(std::move(f)), g_(std::move(g)) {}

  std::optional<OmegaSample> sample(double x, double y) const override {
    const auto fs = f_.eval(x);
    const auto gs = g_.eval(y);
    const auto s = detail::reconstruct_sinh(f_.params.c0, f_.params.a, fs.q, fs.dq, gs.q, gs.dq);
    if (!s) return std::nullopt;
    const double ch = std::sqrt(1.0 + *s * *s);
    return OmegaSample{std::asinh(*s), -fs.q * ch, -gs.q * ch};
  }

  const ProfileSolution& f() const { return f_; }
  const ProfileSolution& g() const { return g_; }

 private:
  ProfileSolution f_, g_;
};

/// The tangent family sinh(omega) = -tan(alpha x + beta y) on its central strip.
class DegenerateSource final : public OmegaSource {
 public:
  DegenerateSource(double alpha, double beta) : alpha_(alpha), beta_(beta) {}

  std::optional<OmegaSample> sample(double x, double y) const override {
    const double s = alpha_ * x + beta_ * y;
    if (!(std::abs(s) < 0.5 * std::numbers::pi)) return std::nullopt;
    const double t = -std::tan(s);
    if (!(std::abs(t) <= kOverflowGuard)) return std::nullopt;
    const double ch = 1.0 / std::cos(s);
    return OmegaSample{std::asinh(t), -alpha_ * ch, -beta_ * ch};
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  double alpha_, beta_;
};

/// Conformal exponent omega of ds^2 = cosh^2(omega)|dz|^2 sampled on a grid.
/// Singular nodes carry NaN in `omega` and `sinh_omega`.
struct OmegaField {
  GridSpec grid;
  ScalarGrid omega;
  ScalarGrid sinh_omega;
  Mask singular;
  double c0 = 0.0;
  Provenance provenance = Provenance::Reconstructed;
  std::shared_ptr<const OmegaSource> source;  // absent for relaxation or loaded fields

  bool is_singular(std::size_t i, std::size_t j) const { return singular(i, j) != 0; }

  /// Nodes whose 3×3 block avoids the one-cell dilation of the singular set.
  Mask stencil_usable() const {
    Mask d = dilate(singular);
    for (auto& v : d.data) v = v ? 0 : 1;
    return d;
  }
};

namespace detail {

/// Nodes next to a pole of N/Phi: Phi changes sign between neighbours while N
/// keeps its sign, or Phi touches zero tangentially along a grid line (its
/// nodal minimum is within the quadratic reach of the neighbouring samples).
inline Mask locate_poles(const ScalarGrid& phi, const ScalarGrid& num, bool need_numerator) {
  const GridSpec& g = phi.spec;
  Mask m(g, 0);
  auto crossing = [&](std::size_t ia, std::size_t ja, std::size_t ib, std::size_t jb) {
    const double pa = phi(ia, ja), pb = phi(ib, jb);
    if (!(pa * pb < 0.0)) return;
    if (need_numerator && !(num(ia, ja) * num(ib, jb) > 0.0)) return;
    if (std::abs(pa) <= std::abs(pb)) m(ia, ja) = 1;
    if (std::abs(pb) <= std::abs(pa)) m(ib, jb) = 1;
  };
  auto tangent = [&](double lo, double mid, double hi) {
    if (!(lo * mid > 0.0 && mid * hi > 0.0)) return false;
    const double a = std::abs(lo), b = std::abs(mid), c = std::abs(hi);
    if (b > a || b > c) return false;
    const double curvature = a + c - 2.0 * b;
    return curvature > 0.0 && b <= 0.125 * curvature * (1.0 + 1e-9);
  };
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (i + 1 < g.nx) crossing(i, j, i + 1, j);
      if (j + 1 < g.ny) crossing(i, j, i, j + 1);
      if (i > 0 && i + 1 < g.nx && tangent(phi(i - 1, j), phi(i, j), phi(i + 1, j))) m(i, j) = 1;
      if (j > 0 && j + 1 < g.ny && tangent(phi(i, j - 1), phi(i, j), phi(i, j + 1))) m(i, j) = 1;
    }
  }
  return m;
}

struct ProfileSamples {
  std::vector<ProfileState> f;  // per column
  std::vector<ProfileState> g;  // per row
};

inline void check_pair(const ProfileSolution& fsol, const ProfileSolution& gsol, const GridSpec& grid) {
  grid.validate();
  if (fsol.kind != ProfileKind::F || gsol.kind != ProfileKind::G)
    throw Error(ErrorCode::GridMismatch, "expected an F profile and a G profile");
  const auto& a = fsol.params;
  const auto& b = gsol.params;
  if (a.c0 != b.c0 || a.c != b.c || a.d != b.d || a.a != b.a)
    throw Error(ErrorCode::GridMismatch, "profiles were built from different parameters");
  if (!fsol.covers(grid.x0, grid.x1) || !gsol.covers(grid.y0, grid.y1))
    throw Error(ErrorCode::GridMismatch, "grid extends beyond the sampled profile range");
}

inline ProfileSamples sample_profiles(const ProfileSolution& fsol, const ProfileSolution& gsol,
                                      const GridSpec& grid) {
  ProfileSamples s;
  s.f.reserve(grid.nx);
  s.g.reserve(grid.ny);
  for (std::size_t i = 0; i < grid.nx; ++i) s.f.push_back(fsol.eval(grid.x(i)));
  for (std::size_t j = 0; j < grid.ny; ++j) s.g.push_back(gsol.eval(grid.y(j)));
  return s;
}

inline bool identically_zero(const ProfileSolution& p) {
  if (p.trivial) return true;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p.values[k] != 0.0 || p.derivs[k] != 0.0) return false;
  return true;
}

}  // namespace detail

/// omega from a pair of profile solutions (the separated solution of the
/// structure equation with constant-curvature level curves).
inline OmegaField assemble_omega(const ProfileSolution& fsol, const ProfileSolution& gsol,
                                 const GridSpec& grid) {
  detail::check_pair(fsol, gsol, grid);
  const auto samples = detail::sample_profiles(fsol, gsol, grid);
  const double c0 = fsol.params.c0, a = fsol.params.a;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  OmegaField field;
  field.grid = grid;
  field.c0 = c0;
  field.provenance = Provenance::Reconstructed;
  field.omega = ScalarGrid(grid, nan);
  field.sinh_omega = ScalarGrid(grid, nan);
  field.singular = Mask(grid, 0);
  ScalarGrid phi(grid), num(grid);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const auto [g, gy] = samples.g[j];
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const auto [f, fx] = samples.f[i];
      phi(i, j) = c0 + f * f + g * g;
      num(i, j) = fx + gy;
      const auto s = detail::reconstruct_sinh(c0, a, f, fx, g, gy);
      if (s) {
        field.sinh_omega(i, j) = *s;
      } else {
        field.singular(i, j) = 1;
      }
    }
  }
  const Mask poles = detail::locate_poles(phi, num, true);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (poles.data[k]) field.singular.data[k] = 1;
    if (field.singular.data[k]) {
      field.sinh_omega.data[k] = nan;
    } else {
      field.omega.data[k] = std::asinh(field.sinh_omega.data[k]);
    }
  }
  if (count(field.singular) == grid.size())
    throw Error(ErrorCode::AllSingular, "every node lies on the singular set");
  field.source = std::make_shared<ProfileSource>(fsol, gsol);
  return field;
}

/// Tangent family on the Gamma curve; only the central strip
/// |alpha x + beta y| < pi/2 is kept, the rest is marked singular.
inline OmegaField assemble_omega_degenerate(double alpha, double beta, const GridSpec& grid) {
  grid.validate();
  if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidParams, "alpha^2 + beta^2 must equal 1");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto src = std::make_shared<DegenerateSource>(alpha, beta);
  OmegaField field;
  field.grid = grid;
  field.c0 = -1.0;
  field.provenance = Provenance::Degenerate;
  field.omega = ScalarGrid(grid, nan);
  field.sinh_omega = ScalarGrid(grid, nan);
  field.singular = Mask(grid, 0);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const auto s = src->sample(grid.x(i), grid.y(j));
      if (!s) {
        field.singular(i, j) = 1;
        continue;
      }
      field.omega(i, j) = s->omega;
      field.sinh_omega(i, j) = std::sinh(s->omega);
    }
  }
  if (count(field.singular) == grid.size())
    throw Error(ErrorCode::AllSingular, "grid lies outside the central strip");
  field.source = std::move(src);
  return field;
}

/// The singular set from its case description: {f^2 + c0 = 0} when g vanishes
/// identically, {g^2 + c0 = 0} when f does, otherwise
/// {c0 + f^2 + g^2 = 0, f_x + g_y != 0}.
inline Mask singular_set(const DerivedParams& dp, const ProfileSolution& fsol,
                         const ProfileSolution& gsol, const GridSpec& grid) {
  detail::check_pair(fsol, gsol, grid);
  (void)dp;
  const auto samples = detail::sample_profiles(fsol, gsol, grid);
  const double c0 = fsol.params.c0;
  const bool f_zero = detail::identically_zero(fsol);
  const bool g_zero = detail::identically_zero(gsol);
  ScalarGrid phi(grid), num(grid);
  Mask m(grid, 0);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const auto [g, gy] = samples.g[j];
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const auto [f, fx] = samples.f[i];
      if (g_zero) phi(i, j) = f * f + c0;
      else if (f_zero) phi(i, j) = g * g + c0;
      else phi(i, j) = f * f + g * g + c0;
      num(i, j) = fx + gy;
      if (std::abs(phi(i, j)) <= kDenominatorEps) {
        // On B: a pole unless the numerator vanishes while fx - gy does not.
        const bool removable = std::abs(num(i, j)) <= kDenominatorEps &&
                               std::abs(fx - gy) > kDenominatorEps;
        if (!removable) m(i, j) = 1;
      }
    }
  }
  const Mask poles = detail::locate_poles(phi, num, true);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (poles.data[k]) m.data[k] = 1;
  return m;
}

/// Residual of  Laplacian(omega) + c0 sinh(omega) cosh(omega)  by the
/// five-point stencil.
inline ResidualStats sinh_gordon_residual(const OmegaField& field) {
  const GridSpec& g = field.grid;
  if (g.nx < 5 || g.ny < 5) throw Error(ErrorCode::TooFewNodes, "need at least 5×5 nodes");
  const Mask usable = field.stencil_usable();
  ResidualAccumulator acc(std::max(g.hx(), g.hy()));
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      if (!block_usable(usable, i, j)) continue;
      const double w = field.omega(i, j);
      acc.add(fd::laplacian(field.omega, i, j) + field.c0 * std::sinh(w) * std::cosh(w));
    }
  }
  return acc.stats();
}

struct LevelCurvatures {
  ScalarGrid k_h;  // horizontal level curves; NaN where not evaluated
  ScalarGrid k_v;  // projected vertical curves; NaN where undefined (omega ~ 0)
};

/// Geodesic curvatures of the level curves: k_h = -omega_y / cosh(omega) and
/// k_v = omega_x coth(omega) / cosh(omega).
inline LevelCurvatures level_curvatures(const OmegaField& field) {
  const GridSpec& g = field.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  LevelCurvatures out{ScalarGrid(g, nan), ScalarGrid(g, nan)};
  const Mask usable = field.stencil_usable();
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      if (!block_usable(usable, i, j)) continue;
      const double w = field.omega(i, j);
      const double ch = std::cosh(w);
      out.k_h(i, j) = -fd::dy(field.omega, i, j) / ch;
      if (std::abs(w) >= kDenominatorEps) out.k_v(i, j) = fd::dx(field.omega, i, j) / ch / std::tanh(w);
    }
  }
  return out;
}

/// Pointwise checks of the algebra behind the reconstruction, evaluated at the
/// grid nodes.
struct ReconstructionChecks {
  double formula_agreement = 0.0;  // max relative gap between the two sinh formulas
  double quartic_identity = 0.0;   // max relative residual of fx^2 - gy^2 = Phi (g^2 - f^2 - a)
  double compatibility = 0.0;      // max |.| of the two compatibility expressions
};

inline ReconstructionChecks reconstruction_checks(const ProfileSolution& fsol,
                                                  const ProfileSolution& gsol, const GridSpec& grid) {
  detail::check_pair(fsol, gsol, grid);
  const auto samples = detail::sample_profiles(fsol, gsol, grid);
  const auto& dp = fsol.params;
  const double c0 = dp.c0, a = dp.a, cb = dp.cbar, db = dp.dbar;
  ReconstructionChecks out;
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const auto [g, gy] = samples.g[j];
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const auto [f, fx] = samples.f[i];
      const double phi = c0 + f * f + g * g;
      const double alt = g * g - f * f - a;
      if (std::abs(phi) > kDenominatorEps && std::abs(fx - gy) > kDenominatorEps) {
        const double s1 = (fx + gy) / phi, s2 = alt / (fx - gy);
        out.formula_agreement =
            std::max(out.formula_agreement, std::abs(s1 - s2) / std::max(1.0, std::abs(s1)));
      }
      const double lhs = fx * fx - gy * gy, rhs = phi * alt;
      const double scale = std::max({1.0, fx * fx + gy * gy, std::abs(rhs)});
      out.quartic_identity = std::max(out.quartic_identity, std::abs(lhs - rhs) / scale);
      const double e1 = f * (c0 * c0 - cb * c0 + dp.c - dp.d) + f * g * g * (2 * c0 - cb - db);
      const double e2 = g * (c0 * c0 - db * c0 + dp.d - dp.c) + f * f * g * (2 * c0 - db - cb);
      out.compatibility = std::max({out.compatibility, std::abs(e1), std::abs(e2)});
    }
  }
  return out;
}

}  // namespace foliata
