#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "foliata/error.hpp"

namespace foliata {

/// Node-centered uniform grid on [x0,x1]×[y0,y1]. Storage is row-major with y
/// outermost: node (i, j) lives at j*nx + i.
struct GridSpec {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  std::size_t nx = 2, ny = 2;

  double hx() const { return (x1 - x0) / static_cast<double>(nx - 1); }
  double hy() const { return (y1 - y0) / static_cast<double>(ny - 1); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * hx(); }
  double y(std::size_t j) const { return y0 + static_cast<double>(j) * hy(); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  std::size_t size() const { return nx * ny; }

  void validate() const {
    if (nx < 2 || ny < 2 || !(x1 > x0) || !(y1 > y0) || !std::isfinite(x0) ||
        !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1)) {
      throw Error(ErrorCode::InvalidParams, "degenerate grid specification");
    }
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Square-cell grid over a rectangle with spacing h (rounded so the end points
/// are nodes).
inline GridSpec grid_with_spacing(double x0, double x1, double y0, double y1, double h) {
  GridSpec g{x0, x1, y0, y1, 0, 0};
  g.nx = static_cast<std::size_t>(std::llround((x1 - x0) / h)) + 1;
  g.ny = static_cast<std::size_t>(std::llround((y1 - y0) / h)) + 1;
  g.validate();
  return g;
}

template <typename T>
struct Grid {
  GridSpec spec;
  std::vector<T> data;

  Grid() = default;
  explicit Grid(const GridSpec& s, T fill = T{}) : spec(s), data(s.size(), fill) {}

  T& operator()(std::size_t i, std::size_t j) { return data[spec.index(i, j)]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[spec.index(i, j)]; }
};

using ScalarGrid = Grid<double>;
using Mask = Grid<std::uint8_t>;

/// Marks every node within one cell (8-neighbourhood) of a marked node.
inline Mask dilate(const Mask& m) {
  Mask out(m.spec, 0);
  const auto nx = m.spec.nx, ny = m.spec.ny;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      if (!m(i, j)) continue;
      const std::size_t ilo = i > 0 ? i - 1 : 0, ihi = std::min(i + 1, nx - 1);
      const std::size_t jlo = j > 0 ? j - 1 : 0, jhi = std::min(j + 1, ny - 1);
      for (std::size_t jj = jlo; jj <= jhi; ++jj)
        for (std::size_t ii = ilo; ii <= ihi; ++ii) out(ii, jj) = 1;
    }
  }
  return out;
}

inline std::size_t count(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.data.begin(), m.data.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

/// Summary of a pointwise residual over the nodes where it was evaluated.
struct ResidualStats {
  double linf = 0.0;
  double l2 = 0.0;  // root-mean-square
  double grid_h = 0.0;
  std::size_t count = 0;
};

class ResidualAccumulator {
 public:
  explicit ResidualAccumulator(double h) : h_(h) {}

  void add(double r) {
    const double a = std::abs(r);
    if (!(a <= linf_)) linf_ = std::isnan(a) ? std::numeric_limits<double>::infinity() : a;
    sumsq_ += r * r;
    ++n_;
  }

  ResidualStats stats() const {
    return {linf_, n_ ? std::sqrt(sumsq_ / static_cast<double>(n_)) : 0.0, h_, n_};
  }

 private:
  double h_;
  double linf_ = 0.0;
  double sumsq_ = 0.0;
  std::size_t n_ = 0;
};

/// Second-order centered difference stencils on a scalar grid.
namespace fd {

inline double dx(const ScalarGrid& w, std::size_t i, std::size_t j) {
  return (w(i + 1, j) - w(i - 1, j)) / (2.0 * w.spec.hx());
}
inline double dy(const ScalarGrid& w, std::size_t i, std::size_t j) {
  return (w(i, j + 1) - w(i, j - 1)) / (2.0 * w.spec.hy());
}
inline double dxx(const ScalarGrid& w, std::size_t i, std::size_t j) {
  const double h = w.spec.hx();
  return (w(i + 1, j) - 2.0 * w(i, j) + w(i - 1, j)) / (h * h);
}
inline double dyy(const ScalarGrid& w, std::size_t i, std::size_t j) {
  const double h = w.spec.hy();
  return (w(i, j + 1) - 2.0 * w(i, j) + w(i, j - 1)) / (h * h);
}
/// Four-point cross stencil for the mixed derivative.
inline double dxy(const ScalarGrid& w, std::size_t i, std::size_t j) {
  return (w(i + 1, j + 1) - w(i - 1, j + 1) - w(i + 1, j - 1) + w(i - 1, j - 1)) /
         (4.0 * w.spec.hx() * w.spec.hy());
}
inline double laplacian(const ScalarGrid& w, std::size_t i, std::size_t j) {
  return dxx(w, i, j) + dyy(w, i, j);
}

}  // namespace fd

/// True when every node of the 3×3 block centred on (i, j) is usable. Nodes on
/// the outer ring never qualify.
inline bool block_usable(const Mask& usable, std::size_t i, std::size_t j) {
  if (i == 0 || j == 0 || i + 1 >= usable.spec.nx || j + 1 >= usable.spec.ny) return false;
  for (std::size_t jj = j - 1; jj <= j + 1; ++jj)
    for (std::size_t ii = i - 1; ii <= i + 1; ++ii)
      if (!usable(ii, jj)) return false;
  return true;
}

}  // namespace foliata
