#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "foliata/error.hpp"
#include "foliata/field.hpp"
#include "foliata/grid.hpp"

namespace foliata {

struct RelaxationOptions {
  std::size_t max_iterations = 100;
  double update_tolerance = 1e-12;  // linf of the accepted Newton update
  int max_halvings = 10;            // damping factor floor 2^-10
};

struct RelaxationInfo {
  std::size_t iterations = 0;
  double last_update = 0.0;
  double residual_linf = 0.0;
};

/// Dirichlet problem for  Laplacian(omega) + c0 sinh(omega) cosh(omega) = 0
/// on the grid of `data`. The outer ring of `data` supplies the boundary
/// values and its interior the initial guess. Damped Newton on the five-point
/// discretisation.
inline OmegaField solve_sinh_gordon(double c0, const ScalarGrid& data,
                                    const RelaxationOptions& opt = {},
                                    RelaxationInfo* info = nullptr) {
  const GridSpec& g = data.spec;
  g.validate();
  if (g.nx < 5 || g.ny < 5) throw Error(ErrorCode::TooFewNodes, "need at least 5×5 nodes");
  for (double v : data.data)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "boundary data must be finite");

  const std::size_t mx = g.nx - 2, my = g.ny - 2, n = mx * my;
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  auto unknown = [mx](std::size_t i, std::size_t j) { return (j - 1) * mx + (i - 1); };

  ScalarGrid w = data;
  auto residual = [&](const ScalarGrid& v, Eigen::VectorXd& r) {
    r.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 1; j + 1 < g.ny; ++j)
      for (std::size_t i = 1; i + 1 < g.nx; ++i) {
        const double x = v(i, j);
        r[static_cast<Eigen::Index>(unknown(i, j))] =
            fd::laplacian(v, i, j) + c0 * std::sinh(x) * std::cosh(x);
      }
  };

  Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  auto assemble = [&] {
    trip.clear();
    for (std::size_t j = 1; j + 1 < g.ny; ++j)
      for (std::size_t i = 1; i + 1 < g.nx; ++i) {
        const auto k = static_cast<int>(unknown(i, j));
        trip.emplace_back(k, k, -2.0 * (ihx2 + ihy2) + c0 * std::cosh(2.0 * w(i, j)));
        if (i > 1) trip.emplace_back(k, static_cast<int>(unknown(i - 1, j)), ihx2);
        if (i + 2 < g.nx) trip.emplace_back(k, static_cast<int>(unknown(i + 1, j)), ihx2);
        if (j > 1) trip.emplace_back(k, static_cast<int>(unknown(i, j - 1)), ihy2);
        if (j + 2 < g.ny) trip.emplace_back(k, static_cast<int>(unknown(i, j + 1)), ihy2);
      }
    jac.setFromTriplets(trip.begin(), trip.end());
  };

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::VectorXd r, r_trial, delta;
  residual(w, r);
  bool analyzed = false;
  RelaxationInfo stats;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    assemble();
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success)
      throw Error(ErrorCode::NonConverged, "singular Newton system at iteration " + std::to_string(it));
    delta = lu.solve(-r);

    const double base = r.lpNorm<Eigen::Infinity>();
    double lambda = 1.0;
    ScalarGrid trial = w;
    for (int halving = 0;; ++halving) {
      for (std::size_t j = 1; j + 1 < g.ny; ++j)
        for (std::size_t i = 1; i + 1 < g.nx; ++i)
          trial(i, j) = w(i, j) + lambda * delta[static_cast<Eigen::Index>(unknown(i, j))];
      residual(trial, r_trial);
      const double trial_norm = r_trial.lpNorm<Eigen::Infinity>();
      if (trial_norm < base || base == 0.0 || halving >= opt.max_halvings) break;
      lambda *= 0.5;
    }
    w = trial;
    r = r_trial;
    stats.iterations = it;
    stats.last_update = lambda * delta.lpNorm<Eigen::Infinity>();
    stats.residual_linf = r.lpNorm<Eigen::Infinity>();
    if (stats.last_update < opt.update_tolerance) {
      if (info) *info = stats;
      OmegaField field;
      field.grid = g;
      field.c0 = c0;
      field.provenance = Provenance::Relaxation;
      field.omega = w;
      field.sinh_omega = ScalarGrid(g);
      for (std::size_t k = 0; k < g.size(); ++k) field.sinh_omega.data[k] = std::sinh(w.data[k]);
      field.singular = Mask(g, 0);
      return field;
    }
  }
  if (info) *info = stats;
  throw Error(ErrorCode::NonConverged, "Newton update " + std::to_string(stats.last_update) +
                                           " after " + std::to_string(opt.max_iterations) +
                                           " iterations");
}

}  // namespace foliata
