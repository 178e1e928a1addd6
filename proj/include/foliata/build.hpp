#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "foliata/error.hpp"
#include "foliata/field.hpp"
#include "foliata/grid.hpp"
#include "foliata/moduli.hpp"
#include "foliata/profile.hpp"
#include "foliata/sinh_gordon_solver.hpp"

// One-call construction of an omega field from a parameter point, shared by
// the command line and the tests.

namespace foliata {

enum class FieldMode { Auto, Reconstruct, Degenerate, Relax };

struct FieldRequest {
  ModuliPoint point;
  GridSpec grid;
  FieldMode mode = FieldMode::Auto;
  bool trivial_f = false;
  bool trivial_g = false;
  double profile_step = 0.0;  // 0 picks min(1e-3, h/4)
  double tolerance = 1e-9;    // first-integral drift budget of the profiles
  double bump = 0.1;          // relaxation: amplitude of the edge bump on y = y0
};

/// Smooth bump on [x0, x1], flat at both ends, equal to `amp` at the midpoint.
inline double edge_bump(double x, double x0, double x1, double amp) {
  const double s = (x - x0) / (x1 - x0);
  if (!(s > 0.0 && s < 1.0)) return 0.0;
  return amp * std::exp(4.0 - 1.0 / (s * (1.0 - s)));
}

inline bool on_gamma_curve(const ModuliPoint& p) {
  if (p.c0 != -1.0) return false;
  const double t = 1.0 + p.c - p.d;
  return near_zero(t * t - 4.0 * p.c, std::max(1.0, t * t));
}

struct ProfilePair {
  ProfileSolution f;
  ProfileSolution g;
};

inline ProfilePair field_profiles(const FieldRequest& req) {
  const GridSpec& g = req.grid;
  const DerivedParams dp = derive_params(req.point);
  const double h = std::min(g.hx(), g.hy());
  const double step = req.profile_step > 0.0 ? req.profile_step : std::min(1e-3, h / 4.0);
  const double pad = 2.0 * std::max(g.hx(), g.hy());
  ProfileOptions fo{req.tolerance, 0.0, req.trivial_f};
  ProfileOptions go{req.tolerance, 0.0, req.trivial_g};
  return {integrate_profile(dp, ProfileKind::F, g.x0 - pad, g.x1 + pad, step, fo),
          integrate_profile(dp, ProfileKind::G, g.y0 - pad, g.y1 + pad, step, go)};
}

inline OmegaField build_field(const FieldRequest& req) {
  req.grid.validate();
  FieldMode mode = req.mode;
  if (mode == FieldMode::Auto) mode = on_gamma_curve(req.point) ? FieldMode::Degenerate : FieldMode::Reconstruct;
  if (mode == FieldMode::Degenerate) {
    const auto [alpha, beta] = degenerate_constants(req.point);
    return assemble_omega_degenerate(alpha, beta, req.grid);
  }
  const auto [f, g] = field_profiles(req);
  OmegaField base = assemble_omega(f, g, req.grid);
  if (mode == FieldMode::Reconstruct) return base;

  if (count(base.singular) != 0)
    throw Error(ErrorCode::InvalidParams, "relaxation needs a domain free of the singular set");
  ScalarGrid data = base.omega;
  const GridSpec& gs = req.grid;
  for (std::size_t i = 0; i < gs.nx; ++i) data(i, 0) += edge_bump(gs.x(i), gs.x0, gs.x1, req.bump);
  return solve_sinh_gordon(req.point.c0, data);
}

/// Period used for holonomy: the f period when f oscillates, otherwise the g
/// period.
inline std::optional<double> holonomy_period(const FieldRequest& req) {
  if (on_gamma_curve(req.point)) return std::nullopt;
  const DerivedParams dp = derive_params(req.point);
  for (auto kind : {ProfileKind::F, ProfileKind::G}) {
    if ((kind == ProfileKind::F ? req.trivial_f : req.trivial_g)) continue;
    try {
      return profile_period(dp, kind);
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

}  // namespace foliata
