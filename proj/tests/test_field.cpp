#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "foliata/build.hpp"
#include "foliata/field.hpp"
#include "foliata/sinh_gordon_solver.hpp"
#include "support.hpp"

using namespace foliata;
using foliata::testing::code_of;
using foliata::testing::reconstructed;

namespace {

GridSpec square(double lo, double hi, double h) { return grid_with_spacing(lo, hi, lo, hi, h); }

}  // namespace

TEST(AssembleOmega, TrivialProfilesGiveZero) {
  FieldRequest r = foliata::testing::request(-1, 0, 0, square(-1, 1, 0.05));
  r.trivial_f = r.trivial_g = true;
  const OmegaField f = build_field(r);
  EXPECT_EQ(count(f.singular), 0u);
  for (double w : f.omega.data) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(sinh_gordon_residual(f).linf, 0.0);
  const auto k = level_curvatures(f);
  for (std::size_t j = 1; j + 1 < f.grid.ny; ++j)
    for (std::size_t i = 1; i + 1 < f.grid.nx; ++i) {
      EXPECT_EQ(k.k_h(i, j), 0.0);
      EXPECT_TRUE(std::isnan(k.k_v(i, j)));
    }
}

TEST(AssembleOmega, PositiveCurvatureHasNoSingularSet) {
  for (auto [c, d] : {std::pair{-1.0, -1.0}, std::pair{0.0, -0.25}, std::pair{-1.0, 0.0}}) {
    const OmegaField f = reconstructed(1, c, d, square(-3, 3, 0.05));
    EXPECT_EQ(count(f.singular), 0u);
    for (std::size_t k = 0; k < f.grid.size(); ++k) {
      ASSERT_TRUE(std::isfinite(f.omega.data[k]));
      ASSERT_NEAR(f.sinh_omega.data[k], std::sinh(f.omega.data[k]), 4e-16 * std::cosh(f.omega.data[k]));
    }
  }
}

TEST(AssembleOmega, SingularRowsWhereGSquaredIsOne) {
  // c0 = -1, c = 0, d = 2: f vanishes and g^2 oscillates in [1, 2].
  const DerivedParams dp = derive_params({-1, 0, 2});
  const double P = profile_period(dp, ProfileKind::G);
  const GridSpec g{-1, 1, 0.05, 2 * P, 41, 401};
  const OmegaField f = reconstructed(-1, 0, 2, g);
  ASSERT_GT(count(f.singular), 0u);
  const auto gs = integrate_profile(dp, ProfileKind::G, g.y0 - 0.1, g.y1 + 0.1, 1e-4);
  for (std::size_t j = 0; j < g.ny; ++j) {
    const bool row = f.is_singular(0, j);
    for (std::size_t i = 0; i < g.nx; ++i) ASSERT_EQ(f.is_singular(i, j), row) << "mask is not a union of rows";
    if (!row) continue;
    // g^2 reaches 1 within one cell of a singular row.
    double best = 1e9;
    for (double t = g.y(j) - g.hy(); t <= g.y(j) + g.hy(); t += 1e-4) {
      const double q = gs.eval(t).q;
      best = std::min(best, std::abs(q * q - 1.0));
    }
    EXPECT_LT(best, 1e-3) << "row y = " << g.y(j);
  }
  const auto fs = integrate_profile(dp, ProfileKind::F, g.x0 - 0.1, g.x1 + 0.1, 1e-3);
  const auto gsol = integrate_profile(dp, ProfileKind::G, g.y0 - 0.1, g.y1 + 0.1, 1e-3);
  const Mask m = singular_set(dp, fs, gsol, g);
  EXPECT_EQ(m.data, f.singular.data);
}

TEST(AssembleOmega, FlatCaseIsolatedPoles) {
  // c0 = 0, c = d = -1, a = 0: both profiles are lemniscatic sines with
  // zeros at multiples of half the period.
  const DerivedParams dp = derive_params({0, -1, -1, 0});
  const double P = profile_period(dp, ProfileKind::F);
  const GridSpec g{-0.3, P + 0.3, -0.3, P + 0.3, 121, 121};
  const auto fs = integrate_profile(dp, ProfileKind::F, g.x0 - 0.1, g.x1 + 0.1, 1e-3);
  const auto gs = integrate_profile(dp, ProfileKind::G, g.y0 - 0.1, g.y1 + 0.1, 1e-3);
  const Mask m = singular_set(dp, fs, gs, g);
  ASSERT_GT(count(m), 0u);
  EXPECT_LT(count(m), 40u);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (!m(i, j)) continue;
      const double kx = std::round(g.x(i) / (0.5 * P)), ky = std::round(g.y(j) / (0.5 * P));
      EXPECT_LE(std::abs(g.x(i) - kx * 0.5 * P), 1.5 * g.hx());
      EXPECT_LE(std::abs(g.y(j) - ky * 0.5 * P), 1.5 * g.hy());
    }
  EXPECT_EQ(assemble_omega(fs, gs, g).singular.data, m.data);
}

TEST(AssembleOmega, SingularSetAgreesAcrossRegions) {
  for (auto [c, d] : {std::pair{-1.0, 1.0}, std::pair{-1.0, -1.0}, std::pair{1.0, -1.0}, std::pair{0.1, 0.2}}) {
    const DerivedParams dp = derive_params({-1, c, d});
    const GridSpec g = square(-4, 4, 0.04);
    const auto fs = integrate_profile(dp, ProfileKind::F, -4.2, 4.2, 1e-3);
    const auto gs = integrate_profile(dp, ProfileKind::G, -4.2, 4.2, 1e-3);
    const OmegaField f = assemble_omega(fs, gs, g);
    EXPECT_EQ(singular_set(dp, fs, gs, g).data, f.singular.data) << c << ' ' << d;
  }
}

TEST(AssembleOmega, ContinuityExtensionAcrossB) {
  // Region 1: the curve c0 + f^2 + g^2 = 0 crosses the domain, yet omega stays
  // finite there except at the poles.
  const GridSpec g = square(-3, 3, 0.02);
  const OmegaField f = reconstructed(-1, -1, 1, g);
  EXPECT_GT(count(f.singular), 0u);
  EXPECT_LT(count(f.singular), g.size() / 4);
  const auto r = sinh_gordon_residual(f);
  EXPECT_GT(r.count, g.size() / 2);
  EXPECT_TRUE(std::isfinite(r.linf));
}

TEST(AssembleOmega, Errors) {
  const DerivedParams dp = derive_params({1, -1, -1});
  const auto fs = integrate_profile(dp, ProfileKind::F, 0, 1, 1e-3);
  const auto gs = integrate_profile(dp, ProfileKind::G, 0, 1, 1e-3);
  EXPECT_EQ(code_of([&] { assemble_omega(fs, gs, square(0, 2, 0.1)); }), ErrorCode::GridMismatch);
  const auto other = integrate_profile(derive_params({1, -0.5, -1}), ProfileKind::G, 0, 1, 1e-3);
  EXPECT_EQ(code_of([&] { assemble_omega(fs, other, square(0, 1, 0.1)); }), ErrorCode::GridMismatch);
  EXPECT_EQ(code_of([&] { assemble_omega_degenerate(0.5, 0.5, square(0, 1, 0.1)); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([&] { assemble_omega_degenerate(0, 1, GridSpec{0, 1, 2, 3, 11, 11}); }),
            ErrorCode::AllSingular);
}

TEST(AssembleOmegaDegenerate, ClosedFormValues) {
  const GridSpec g{-1, 1, 0, 0.5 * std::numbers::pi, 21, 41};
  const OmegaField f = assemble_omega_degenerate(0, 1, g);
  EXPECT_EQ(f.provenance, Provenance::Degenerate);
  EXPECT_DOUBLE_EQ(f.omega(3, 0), 0.0);
  EXPECT_NEAR(f.sinh_omega(3, 20), -1.0, 1e-15);
  EXPECT_NEAR(f.omega(3, 20), -std::asinh(1.0), 1e-15);
  EXPECT_NEAR(f.omega(3, 20), -0.88137, 1e-5);
  // y = pi/2 is on the singular set.
  EXPECT_TRUE(f.is_singular(3, 40));
  EXPECT_FALSE(f.is_singular(3, 39));
}

TEST(AssembleOmegaDegenerate, HorocycleCurvature) {
  std::vector<double> err;
  for (double h : {0.02, 0.01}) {
    const OmegaField f = assemble_omega_degenerate(0, 1, grid_with_spacing(-1, 1, -1.2, 1.2, h));
    const auto k = level_curvatures(f);
    double e = 0.0;
    for (double v : k.k_h.data)
      if (std::isfinite(v)) e = std::max(e, std::abs(v - 1.0));
    EXPECT_LT(e, 4.0 * h * h);
    err.push_back(e);
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.5);
}

TEST(SinhGordonResidual, SecondOrderRefinement) {
  auto ratios = [](auto make) {
    std::vector<double> e;
    for (double h : {0.02, 0.01, 0.005}) e.push_back(sinh_gordon_residual(make(h)).linf);
    return std::pair{e[0] / e[1], e[1] / e[2]};
  };
  const auto [r1, r2] = ratios([](double h) { return reconstructed(1, -1, -1, square(0, 1, h)); });
  EXPECT_NEAR(r1, 4.0, 0.5);
  EXPECT_NEAR(r2, 4.0, 0.5);
  const auto [d1, d2] = ratios([](double h) {
    return assemble_omega_degenerate(0, 1, grid_with_spacing(-1, 1, -1.2, 1.2, h));
  });
  EXPECT_NEAR(d1, 4.0, 0.5);
  EXPECT_NEAR(d2, 4.0, 0.5);
}

TEST(SinhGordonResidual, TooFewNodes) {
  const OmegaField f = foliata::testing::analytic_field(-1, GridSpec{0, 1, 0, 1, 4, 9}, [](double, double) { return 0.0; });
  EXPECT_EQ(code_of([&] { sinh_gordon_residual(f); }), ErrorCode::TooFewNodes);
}

TEST(LevelCurvatures, HorizontalCurvatureIsG) {
  const GridSpec g = square(-1, 1, 0.01);
  const OmegaField f = reconstructed(1, 0, -0.25, g);
  const auto* src = dynamic_cast<const ProfileSource*>(f.source.get());
  ASSERT_NE(src, nullptr);
  const auto k = level_curvatures(f);
  double err = 0.0, spread = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    const double gy = src->g().eval(g.y(j)).q;
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      err = std::max(err, std::abs(k.k_h(i, j) - gy));
      lo = std::min(lo, k.k_h(i, j));
      hi = std::max(hi, k.k_h(i, j));
    }
    spread = std::max(spread, hi - lo);
  }
  EXPECT_LT(err, 1e-4);
  EXPECT_LT(spread, 1e-4);
}

TEST(LevelCurvatures, VerticalCurvatureTimesTanhIsMinusF) {
  const GridSpec g = square(-1, 1, 0.01);
  const OmegaField f = reconstructed(1, -1, 0, g);
  const auto* src = dynamic_cast<const ProfileSource*>(f.source.get());
  const auto k = level_curvatures(f);
  double err = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      if (!std::isfinite(k.k_v(i, j))) continue;
      ++n;
      err = std::max(err, std::abs(k.k_v(i, j) * std::tanh(f.omega(i, j)) + src->f().eval(g.x(i)).q));
    }
  EXPECT_GT(n, 100u);
  EXPECT_LT(err, 1e-4);
}

TEST(ReconstructionChecks, IdentitiesHold) {
  struct Case {
    double c0, c, d;
  };
  for (const Case& cs : {Case{1, -1, -1}, Case{1, 0, -0.25}, Case{-1, -1, 1}, Case{-1, -1, -1},
                         Case{-1, 1, -1}, Case{-1, 0.1, 0.2}, Case{-2, -1, -3}}) {
    const FieldRequest r = foliata::testing::request(cs.c0, cs.c, cs.d, square(-3, 3, 0.05));
    const auto [fs, gs] = field_profiles(r);
    const auto chk = reconstruction_checks(fs, gs, r.grid);
    EXPECT_LT(chk.formula_agreement, 1e-8) << cs.c0 << ' ' << cs.c << ' ' << cs.d;
    EXPECT_LT(chk.quartic_identity, 1e-8) << cs.c0 << ' ' << cs.c << ' ' << cs.d;
    EXPECT_LT(chk.compatibility, 1e-10) << cs.c0 << ' ' << cs.c << ' ' << cs.d;
  }
}

TEST(SolveSinhGordon, ZeroBoundaryGivesZero) {
  const GridSpec g = square(0, 1, 0.05);
  ScalarGrid data(g, 0.0);
  data(10, 10) = 0.3;  // interior guess only
  RelaxationInfo info;
  const OmegaField f = solve_sinh_gordon(-1, data, {}, &info);
  EXPECT_EQ(f.provenance, Provenance::Relaxation);
  for (double w : f.omega.data) EXPECT_LT(std::abs(w), 1e-13);
  EXPECT_LE(info.last_update, 1e-12);
}

TEST(SolveSinhGordon, RecoversReconstructionToSecondOrder) {
  std::vector<double> err;
  for (double h : {0.04, 0.02}) {
    const OmegaField exact = reconstructed(-1, -0.25, -0.25, square(-1, 1, h));
    ASSERT_EQ(count(exact.singular), 0u);
    ScalarGrid data = exact.omega;
    for (std::size_t j = 1; j + 1 < data.spec.ny; ++j)
      for (std::size_t i = 1; i + 1 < data.spec.nx; ++i) data(i, j) = 0.0;
    const OmegaField f = solve_sinh_gordon(-1, data);
    double e = 0.0;
    for (std::size_t k = 0; k < f.grid.size(); ++k) e = std::max(e, std::abs(f.omega.data[k] - exact.omega.data[k]));
    err.push_back(e);
  }
  EXPECT_LT(err[1], 1e-3);
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.5);
}

TEST(SolveSinhGordon, PerturbedBoundaryConverges) {
  FieldRequest r = foliata::testing::request(-1, -0.25, -0.25, square(0, 1, 0.02));
  r.mode = FieldMode::Relax;
  const OmegaField f = build_field(r);
  EXPECT_EQ(f.provenance, Provenance::Relaxation);
  EXPECT_LT(sinh_gordon_residual(f).linf, 1e-10);
  EXPECT_EQ(f.source, nullptr);
}

TEST(SolveSinhGordon, Errors) {
  EXPECT_EQ(code_of([] { solve_sinh_gordon(-1, ScalarGrid(GridSpec{0, 1, 0, 1, 4, 4})); }), ErrorCode::TooFewNodes);
  ScalarGrid bad(square(0, 1, 0.1), 0.0);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of([&] { solve_sinh_gordon(-1, bad); }), ErrorCode::InvalidParams);
  // A large boundary with one Newton step cannot converge.
  ScalarGrid big(square(0, 1, 0.05), 3.0);
  EXPECT_EQ(code_of([&] { solve_sinh_gordon(-1, big, {1, 1e-12, 10}); }), ErrorCode::NonConverged);
}

TEST(StencilUsable, DilatesSingularSet) {
  OmegaField f = foliata::testing::analytic_field(-1, square(0, 1, 0.1), [](double, double) { return 0.0; });
  f.singular(5, 5) = 1;
  const Mask u = f.stencil_usable();
  EXPECT_EQ(count(u), f.grid.size() - 9);
  EXPECT_FALSE(u(4, 6));
  EXPECT_TRUE(u(3, 5));
}
