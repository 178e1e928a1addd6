#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <gtest/gtest.h>

#include "foliata/build.hpp"
#include "foliata/field.hpp"
#include "foliata/grid.hpp"

namespace foliata::testing {

/// Field sampled from an analytic omega; no closed-form source is attached.
inline OmegaField analytic_field(double c0, const GridSpec& g, const std::function<double(double, double)>& w) {
  OmegaField f;
  f.grid = g;
  f.c0 = c0;
  f.provenance = Provenance::Relaxation;
  f.omega = ScalarGrid(g);
  f.sinh_omega = ScalarGrid(g);
  f.singular = Mask(g, 0);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      f.omega(i, j) = w(g.x(i), g.y(j));
      f.sinh_omega(i, j) = std::sinh(f.omega(i, j));
    }
  return f;
}

inline FieldRequest request(double c0, double c, double d, const GridSpec& g) {
  FieldRequest r;
  r.point = {c0, c, d, 0.0};
  r.grid = g;
  return r;
}

inline OmegaField reconstructed(double c0, double c, double d, const GridSpec& g) {
  return build_field(request(c0, c, d, g));
}

/// Code of the foliata::Error thrown by fn; records a failure when none is.
inline ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidParams;
}

/// log2 of successive ratios e[k] / e[k+1]: observed order for halved h.
inline double order(double coarse, double fine) { return std::log2(coarse / fine); }

inline double max_abs_finite(const ScalarGrid& v) {
  double m = 0.0;
  for (double x : v.data)
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace foliata::testing
