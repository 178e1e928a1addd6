#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "foliata/build.hpp"
#include "foliata/shiffman.hpp"
#include "support.hpp"

using namespace foliata;
using foliata::testing::analytic_field;
using foliata::testing::code_of;
using foliata::testing::reconstructed;

namespace {

GridSpec square(double lo, double hi, double h) { return grid_with_spacing(lo, hi, lo, hi, h); }

// Relaxed sinh-Gordon field with a bumped edge: not of separated type, so u
// does not vanish.
OmegaField perturbed(double h) {
  FieldRequest r = foliata::testing::request(-1, -0.25, -0.25, square(-0.5, 0.5, h));
  r.mode = FieldMode::Relax;
  r.bump = 0.1;
  return build_field(r);
}

}  // namespace

TEST(ShiffmanField, BilinearNegativeControl) {
  const OmegaField f = analytic_field(-1, square(-1, 1, 0.1), [](double x, double y) { return x * y; });
  const ScalarGrid u = shiffman_field(f);
  EXPECT_DOUBLE_EQ(u(10, 10), 1.0);
  EXPECT_GT(detail::max_abs(u), 1.0);
}

TEST(ShiffmanField, ZeroFieldQuantities) {
  const OmegaField f = analytic_field(-2, square(0, 1, 0.1), [](double, double) { return 0.0; });
  const JacobiReport r = jacobi_report(f);
  EXPECT_EQ(r.max_u, 0.0);
  EXPECT_EQ(r.residual.linf, 0.0);
  for (std::size_t j = 1; j + 1 < f.grid.ny; ++j)
    for (std::size_t i = 1; i + 1 < f.grid.nx; ++i) {
      EXPECT_EQ(r.potential(i, j), -2.0);
      EXPECT_EQ(r.gauss(i, j), 0.0);
    }
  EXPECT_EQ(r.gauss_dual_route_linf, 0.0);
  EXPECT_EQ(r.potential_identity_linf, 0.0);
}

TEST(ShiffmanField, VanishesAtSecondOrderOnSeparatedFields) {
  auto constants = [](double c0, double c, double d, std::initializer_list<double> hs) {
    std::vector<double> C;
    for (double h : hs) {
      const OmegaField f = reconstructed(c0, c, d, square(0, 1, h));
      EXPECT_EQ(count(f.singular), 0u);
      C.push_back(detail::max_abs(shiffman_field(f)) / (h * h));
    }
    return C;
  };
  const auto C = constants(1, -1, -1, {0.02, 0.01, 0.005});
  EXPECT_GT(C[0], 0.0);
  EXPECT_NEAR(C[1] / C[0], 1.0, 0.1);
  EXPECT_NEAR(C[2] / C[1], 1.0, 0.1);
  // Steep gradients near the edge keep this one pre-asymptotic at coarse h;
  // the observed order climbs towards 2.
  const auto D = constants(-1, -0.25, -0.25, {0.01, 0.005, 0.0025});
  const double p1 = 2.0 - std::log2(D[1] / D[0]), p2 = 2.0 - std::log2(D[2] / D[1]);
  EXPECT_GT(p2, p1);
  EXPECT_NEAR(p2, 2.0, 0.1);
  // f vanishes, omega depends on y alone and u is exactly zero.
  for (double v : constants(1, 0, -0.25, {0.02, 0.01})) EXPECT_EQ(v, 0.0);
}

TEST(ShiffmanField, CurvatureRouteAgreesAtSecondOrder) {
  // Compared on the nodes common to both grids; the nodes next to the edge
  // carry a larger h^2 coefficient.
  std::vector<double> gap;
  for (double h : {0.02, 0.01}) gap.push_back(jacobi_report(perturbed(h), 0.04).consistency_linf);
  EXPECT_GT(gap[0], 0.0);
  EXPECT_NEAR(gap[0] / gap[1], 4.0, 0.5);
  // The field itself is far from zero.
  EXPECT_GT(jacobi_report(perturbed(0.02)).max_u, 1e-2);
}

TEST(ShiffmanField, TooFewNodes) {
  const OmegaField f = analytic_field(-1, GridSpec{0, 1, 0, 1, 4, 10}, [](double, double) { return 0.0; });
  EXPECT_EQ(code_of([&] { shiffman_field(f); }), ErrorCode::TooFewNodes);
}

TEST(JacobiResidual, SecondOrderOnRelaxedField) {
  std::vector<double> e;
  for (double h : {0.02, 0.01, 0.005}) {
    const OmegaField f = perturbed(h);
    e.push_back(jacobi_residual(f, shiffman_field(f), 0.04).linf);
  }
  EXPECT_NEAR(e[0] / e[1], 4.0, 0.5);
  EXPECT_NEAR(e[1] / e[2], 4.0, 0.5);
}

TEST(JacobiResidual, ArbitraryFunctionIsNotAJacobiField) {
  // On omega = 0 the operator is Laplacian + c0, so v = sin(pi x) sin(pi y)
  // leaves (c0 - 2 pi^2) v.
  std::vector<double> e;
  for (double h : {0.02, 0.01}) {
    const OmegaField f = analytic_field(-1, square(0, 1, h), [](double, double) { return 0.0; });
    const OmegaField v = analytic_field(-1, square(0, 1, h), [](double x, double y) {
      return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    });
    e.push_back(jacobi_residual(f, v.omega).linf);
  }
  const double expected = 2 * std::numbers::pi * std::numbers::pi + 1;
  EXPECT_NEAR(e[1], expected, 1e-2 * expected);
  EXPECT_NEAR(e[0] / e[1], 1.0, 1e-2);
}

TEST(JacobiResidual, SmallOnSeparatedFields) {
  const OmegaField f = reconstructed(1, -1, -1, square(0, 1, 0.01));
  const JacobiReport r = jacobi_report(f);
  const OmegaField p = perturbed(0.01);
  EXPECT_LT(r.residual.linf, 1e-2 * jacobi_report(p).max_u);
}

TEST(JacobiResidual, GridMismatch) {
  const OmegaField f = analytic_field(-1, square(0, 1, 0.1), [](double, double) { return 0.0; });
  EXPECT_EQ(code_of([&] { jacobi_residual(f, ScalarGrid(square(0, 1, 0.05))); }), ErrorCode::GridMismatch);
}

TEST(JacobiPotential, NonnegativeForPositiveCurvature) {
  const OmegaField f = reconstructed(1, -1, 0, square(-2, 2, 0.02));
  const ScalarGrid p = jacobi_potential(f);
  std::size_t n = 0;
  for (double v : p.data)
    if (std::isfinite(v)) {
      ++n;
      EXPECT_GE(v, 0.0);
    }
  EXPECT_GT(n, 0u);
}

TEST(JacobiPotential, IdentityRefinesAtSecondOrder) {
  for (auto make : {+[](double h) { return perturbed(h); },
                    +[](double h) { return assemble_omega_degenerate(0, 1, grid_with_spacing(-1, 1, -1.2, 1.2, h)); }}) {
    std::vector<double> pot, gauss;
    for (double h : {0.02, 0.01}) {
      const JacobiReport r = jacobi_report(make(h), 0.04);
      pot.push_back(r.potential_identity_linf);
      gauss.push_back(r.gauss_dual_route_linf);
    }
    EXPECT_NEAR(pot[0] / pot[1], 4.0, 0.5);
    EXPECT_NEAR(gauss[0] / gauss[1], 4.0, 0.5);
  }
}

TEST(GaussCurvature, DegenerateFamilyHasConstantCurvature) {
  // sinh omega = -tan y: tanh omega = -sin y and omega_y / cosh^2 = -cos y, so
  // K = -sin^2 y - cos^2 y = -1 exactly.
  const OmegaField f = assemble_omega_degenerate(0, 1, grid_with_spacing(-1, 1, -1.2, 1.2, 0.01));
  const ScalarGrid k = gauss_curvature(f), ki = gauss_curvature_intrinsic(f);
  double e = 0.0, ei = 0.0;
  for (std::size_t n = 0; n < k.data.size(); ++n) {
    if (!std::isfinite(k.data[n])) continue;
    e = std::max(e, std::abs(k.data[n] + 1.0));
    ei = std::max(ei, std::abs(ki.data[n] + 1.0));
  }
  EXPECT_LT(e, 1e-3);
  EXPECT_LT(ei, 1e-3);
}

TEST(GaussCurvature, BoundedByAmbientForPositiveCurvature) {
  const OmegaField f = reconstructed(1, -1, -1, square(-2, 2, 0.02));
  for (double v : gauss_curvature(f).data)
    if (std::isfinite(v)) EXPECT_LE(v, 1.0);
}
