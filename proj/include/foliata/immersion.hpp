#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "foliata/chart.hpp"
#include "foliata/error.hpp"
#include "foliata/field.hpp"
#include "foliata/grid.hpp"
#include "foliata/moduli.hpp"
#include "foliata/parallel.hpp"

// Frame integration of the harmonic map F into the chart and the immersion
// X = (F, y). The frame angle psi is the argument of F_x; along x and y the
// state (psi, u1, u2) obeys
//   psi_x = -w_y + ch/(2 sqrt rho) (cos psi L2 - sin psi L1),  u_x = ch/sqrt rho (cos psi, sin psi)
//   psi_y =  w_x - sh/(2 sqrt rho) (cos psi L1 + sin psi L2),  u_y = sh/sqrt rho (-sin psi, cos psi)
// with (L1, L2) = grad log rho.

namespace foliata {

using cplx = std::complex<double>;

struct FrameState {
  double psi = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
};

struct FrameSeed {
  double x = 0.0;
  double y = 0.0;
  double psi0 = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
};

struct FrameOptions {
  std::size_t substeps = 1;      // RK4 steps per grid cell
  bool strict = false;           // throw on singular crossing / chart overflow instead of clipping
  std::size_t compat_stride = 0;  // subsample stride of the transposed path; 0 picks ~20 lines
};

struct FrameField {
  GridSpec grid;
  ChartSpace space;
  ScalarGrid psi;
  ScalarGrid u1;
  ScalarGrid u2;
  Mask valid;  // nodes reached by the integration path
  std::size_t seed_i = 0, seed_j = 0;
  FrameState seed_state;
  double compat_linf = 0.0;

  FrameState state(std::size_t i, std::size_t j) const { return {psi(i, j), u1(i, j), u2(i, j)}; }
};

/// Off-grid omega from a sampled field: tensor cubic Lagrange interpolation of
/// omega and of its centered-difference gradient. Used when no closed-form
/// source is attached (relaxation or loaded fields).
class GridSource final : public OmegaSource {
 public:
  explicit GridSource(const OmegaField& field)
      : g_(field.grid), w_(field.omega), wx_(field.grid), wy_(field.grid), sing_(field.singular) {
    const std::size_t nx = g_.nx, ny = g_.ny;
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        wx_(i, j) = derivative(i, j, true);
        wy_(i, j) = derivative(i, j, false);
      }
  }

  std::optional<OmegaSample> sample(double x, double y) const override {
    const auto sx = stencil(x, g_.x0, g_.hx(), g_.nx);
    const auto sy = stencil(y, g_.y0, g_.hy(), g_.ny);
    if (!sx || !sy) return std::nullopt;
    OmegaSample s{};
    for (int b = 0; b < 4; ++b)
      for (int a = 0; a < 4; ++a) {
        const std::size_t i = sx->first + static_cast<std::size_t>(a);
        const std::size_t j = sy->first + static_cast<std::size_t>(b);
        if (sing_(i, j)) return std::nullopt;
        const double wgt = sx->second[a] * sy->second[b];
        s.omega += wgt * w_(i, j);
        s.omega_x += wgt * wx_(i, j);
        s.omega_y += wgt * wy_(i, j);
      }
    return s;
  }

 private:
  using Stencil = std::pair<std::size_t, std::array<double, 4>>;

  static std::optional<Stencil> stencil(double x, double x0, double h, std::size_t n) {
    const double t = (x - x0) / h;
    if (t < -1e-9 || t > static_cast<double>(n - 1) + 1e-9 || n < 4) return std::nullopt;
    const auto base = std::clamp<long long>(static_cast<long long>(std::floor(t)) - 1, 0,
                                            static_cast<long long>(n) - 4);
    const double s = t - static_cast<double>(base);
    std::array<double, 4> w{};
    for (int k = 0; k < 4; ++k) {
      double v = 1.0;
      for (int m = 0; m < 4; ++m)
        if (m != k) v *= (s - m) / static_cast<double>(k - m);
      w[static_cast<std::size_t>(k)] = v;
    }
    return Stencil{static_cast<std::size_t>(base), w};
  }

  // Centered where possible, second-order one-sided at the edges and next to
  // singular nodes.
  double derivative(std::size_t i, std::size_t j, bool along_x) const {
    const std::size_t n = along_x ? g_.nx : g_.ny, k = along_x ? i : j;
    const double h = along_x ? g_.hx() : g_.hy();
    auto at = [&](long long m) -> double {
      if (m < 0 || m >= static_cast<long long>(n)) return std::numeric_limits<double>::quiet_NaN();
      const auto mm = static_cast<std::size_t>(m);
      const std::size_t ii = along_x ? mm : i, jj = along_x ? j : mm;
      return sing_(ii, jj) ? std::numeric_limits<double>::quiet_NaN() : w_(ii, jj);
    };
    const auto kk = static_cast<long long>(k);
    const double c = at(kk), l = at(kk - 1), r = at(kk + 1);
    if (std::isfinite(l) && std::isfinite(r)) return (r - l) / (2.0 * h);
    const double r2 = at(kk + 2), l2 = at(kk - 2);
    if (std::isfinite(r) && std::isfinite(r2)) return (-3.0 * c + 4.0 * r - r2) / (2.0 * h);
    if (std::isfinite(l) && std::isfinite(l2)) return (3.0 * c - 4.0 * l + l2) / (2.0 * h);
    return std::numeric_limits<double>::quiet_NaN();
  }

  GridSpec g_;
  ScalarGrid w_, wx_, wy_;
  Mask sing_;
};

inline std::shared_ptr<const OmegaSource> omega_source(const OmegaField& field) {
  if (field.source) return field.source;
  return std::make_shared<GridSource>(field);
}

namespace detail {

inline FrameState frame_rhs(const OmegaSample& s, const ChartSpace& space, const FrameState& st,
                            bool along_x) {
  const ChartFactor cf = chart_factor(space, st.u1, st.u2);
  const double sr = std::sqrt(cf.rho);
  const auto [l1, l2] = cf.grad_log_rho;
  const double cp = std::cos(st.psi), sp = std::sin(st.psi);
  if (along_x) {
    const double ch = std::cosh(s.omega);
    return {-s.omega_y + ch / (2.0 * sr) * (cp * l2 - sp * l1), ch / sr * cp, ch / sr * sp};
  }
  const double sh = std::sinh(s.omega);
  return {s.omega_x - sh / (2.0 * sr) * (cp * l1 + sp * l2), -sh / sr * sp, sh / sr * cp};
}

inline FrameState axpy(const FrameState& a, double h, const FrameState& k) {
  return {a.psi + h * k.psi, a.u1 + h * k.u1, a.u2 + h * k.u2};
}

/// One RK4 step of length h from (x, y) along x or y. Returns the failure code
/// when omega is unavailable or the chart overflows.
inline std::optional<ErrorCode> frame_step(const OmegaSource& src, const ChartSpace& space,
                                           double x, double y, bool along_x, double h,
                                           FrameState& st) {
  auto eval = [&](double t, const FrameState& s, FrameState& out) -> std::optional<ErrorCode> {
    const auto w = along_x ? src.sample(x + t, y) : src.sample(x, y + t);
    if (!w) return ErrorCode::SingularCrossing;
    try {
      out = frame_rhs(*w, space, s, along_x);
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  FrameState k1, k2, k3, k4;
  if (auto e = eval(0.0, st, k1)) return e;
  if (auto e = eval(0.5 * h, axpy(st, 0.5 * h, k1), k2)) return e;
  if (auto e = eval(0.5 * h, axpy(st, 0.5 * h, k2), k3)) return e;
  if (auto e = eval(h, axpy(st, h, k3), k4)) return e;
  st.psi += h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
  st.u1 += h / 6.0 * (k1.u1 + 2.0 * k2.u1 + 2.0 * k3.u1 + k4.u1);
  st.u2 += h / 6.0 * (k1.u2 + 2.0 * k2.u2 + 2.0 * k3.u2 + k4.u2);
  const double r = std::hypot(st.u1, st.u2);
  if (space.kind == ChartKind::PoincareDisk && !(r < kDiskEdge)) return ErrorCode::ChartOverflow;
  if (space.kind == ChartKind::Stereographic && !(r < kStereoEdge)) return ErrorCode::ChartOverflow;
  if (!std::isfinite(st.psi) || !std::isfinite(st.u1) || !std::isfinite(st.u2))
    return ErrorCode::ChartOverflow;
  return std::nullopt;
}

/// Marches along a grid line from node `from` towards increasing (dir = +1) or
/// decreasing (dir = -1) index, storing every reached node through `store`.
/// Stops at the first failure (or throws when strict).
template <typename Store>
void march_line(const OmegaSource& src, const OmegaField& field, const ChartSpace& space,
                std::size_t i, std::size_t j, bool along_x, int dir, FrameState st,
                const FrameOptions& opt, Store&& store) {
  const GridSpec& g = field.grid;
  const std::size_t n = along_x ? g.nx : g.ny;
  const double h = (along_x ? g.hx() : g.hy()) * dir / static_cast<double>(opt.substeps);
  std::size_t k = along_x ? i : j;
  while ((dir > 0 && k + 1 < n) || (dir < 0 && k > 0)) {
    const std::size_t next = dir > 0 ? k + 1 : k - 1;
    const std::size_t ni = along_x ? next : i, nj = along_x ? j : next;
    std::optional<ErrorCode> fail;
    if (field.is_singular(ni, nj)) fail = ErrorCode::SingularCrossing;
    double x = g.x(along_x ? k : i), y = g.y(along_x ? j : k);
    for (std::size_t s = 0; s < opt.substeps && !fail; ++s) {
      fail = frame_step(src, space, x, y, along_x, h, st);
      (along_x ? x : y) += h;
    }
    if (fail) {
      if (opt.strict)
        throw Error(*fail, std::string("frame path stopped before node (") + std::to_string(ni) +
                               ", " + std::to_string(nj) + ")");
      return;
    }
    store(ni, nj, st);
    k = next;
  }
}

inline std::size_t nearest_index(double v, double v0, double h, std::size_t n) {
  const auto k = std::llround((v - v0) / h);
  return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(n) - 1));
}

}  // namespace detail

/// Integrates the frame along the seed column, then along every row from that
/// column. Rows run in parallel. The transposed path (seed row, then columns) is
/// integrated on a subsample and compared into `compat_linf`.
inline FrameField integrate_frame(const OmegaField& field, const ChartSpace& space,
                                  const FrameSeed& seed, const FrameOptions& opt = {}) {
  const GridSpec& g = field.grid;
  if (opt.substeps == 0) throw Error(ErrorCode::InvalidParams, "substeps must be positive");
  if (space.c0 != field.c0)
    throw Error(ErrorCode::InvalidParams, "chart curvature differs from the field curvature");
  const std::size_t si = detail::nearest_index(seed.x, g.x0, g.hx(), g.nx);
  const std::size_t sj = detail::nearest_index(seed.y, g.y0, g.hy(), g.ny);
  if (field.is_singular(si, sj)) throw Error(ErrorCode::SingularCrossing, "seed node is singular");
  const FrameState s0{seed.psi0, seed.u1, seed.u2};
  chart_factor(space, s0.u1, s0.u2);  // rejects a seed outside the chart

  const double nan = std::numeric_limits<double>::quiet_NaN();
  FrameField fr{g, space, ScalarGrid(g, nan), ScalarGrid(g, nan), ScalarGrid(g, nan), Mask(g, 0),
                si, sj, s0, 0.0};
  auto store = [&fr](std::size_t i, std::size_t j, const FrameState& st) {
    fr.psi(i, j) = st.psi;
    fr.u1(i, j) = st.u1;
    fr.u2(i, j) = st.u2;
    fr.valid(i, j) = 1;
  };
  const auto src = omega_source(field);
  store(si, sj, s0);
  for (int dir : {+1, -1}) detail::march_line(*src, field, space, si, sj, false, dir, s0, opt, store);

  parallel_for(g.ny, [&](std::size_t j) {
    if (!fr.valid(si, j)) return;
    const FrameState st = fr.state(si, j);
    for (int dir : {+1, -1}) detail::march_line(*src, field, space, si, j, true, dir, st, opt, store);
  });

  // Transposed path on a subsample.
  const std::size_t stride =
      opt.compat_stride ? opt.compat_stride : std::max<std::size_t>(1, std::max(g.nx, g.ny) / 20);
  std::vector<std::optional<FrameState>> row(g.nx);
  row[si] = s0;
  auto store_row = [&row](std::size_t i, std::size_t, const FrameState& st) { row[i] = st; };
  for (int dir : {+1, -1}) detail::march_line(*src, field, space, si, sj, true, dir, s0, opt, store_row);
  std::vector<std::size_t> columns;
  for (std::size_t i = si % stride; i < g.nx; i += stride)
    if (row[i]) columns.push_back(i);
  std::vector<double> gaps(columns.size(), 0.0);
  parallel_for(columns.size(), [&](std::size_t c) {
    const std::size_t i = columns[c];
    double gap = 0.0;
    auto compare = [&](std::size_t ii, std::size_t j, const FrameState& st) {
      if ((j + stride - sj % stride) % stride != 0 || !fr.valid(ii, j)) return;
      gap = std::max({gap, std::abs(st.psi - fr.psi(ii, j)), std::abs(st.u1 - fr.u1(ii, j)),
                      std::abs(st.u2 - fr.u2(ii, j))});
    };
    compare(i, sj, *row[i]);
    for (int dir : {+1, -1})
      detail::march_line(*src, field, space, i, sj, false, dir, *row[i], opt, compare);
    gaps[c] = gap;
  });
  for (double v : gaps) fr.compat_linf = std::max(fr.compat_linf, v);
  return fr;
}

/// Default seed: u0 = 0, psi0 = 0 at the non-singular node nearest to an axis
/// feature of the f profile (a zero of f or of f_x) closest to the domain
/// centre; the centre itself when there is no profile.
inline FrameSeed default_seed(const OmegaField& field) {
  const GridSpec& g = field.grid;
  const double xc = 0.5 * (g.x0 + g.x1), yc = 0.5 * (g.y0 + g.y1);
  double xs = xc;
  if (const auto* ps = dynamic_cast<const ProfileSource*>(field.source.get())) {
    const ProfileSolution& f = ps->f();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
      const double xa = f.x(k), xb = f.x(k + 1);
      // Half a cell of slack keeps a zero sitting on the domain edge.
      if (xb < g.x0 - 0.5 * g.hx() || xa > g.x1 + 0.5 * g.hx()) continue;
      for (const auto* v : {&f.values, &f.derivs}) {
        const double qa = (*v)[k], qb = (*v)[k + 1];
        if (qa != 0.0 && (qa < 0.0) == (qb < 0.0)) continue;
        const double xr = qa == qb ? xa : xa + (xb - xa) * qa / (qa - qb);
        if (std::abs(xr - xc) < best) {
          best = std::abs(xr - xc);
          xs = xr;
        }
      }
    }
  }
  const std::size_t ci = detail::nearest_index(xs, g.x0, g.hx(), g.nx);
  const std::size_t cj = detail::nearest_index(yc, g.y0, g.hy(), g.ny);
  // Nearest non-singular node, preferring the axis column.
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = ci, bj = cj;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (field.is_singular(i, j)) continue;
      const double di = static_cast<double>(i) - static_cast<double>(ci);
      const double dj = static_cast<double>(j) - static_cast<double>(cj);
      const double d = 4.0 * di * di + dj * dj;
      if (d < best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  if (!std::isfinite(best)) throw Error(ErrorCode::AllSingular, "no regular node for the seed");
  return {g.x(bi), g.y(bj), 0.0, 0.0, 0.0};
}

namespace detail {

inline bool frame_block(const FrameField& fr, const OmegaField& field, std::size_t i, std::size_t j) {
  const GridSpec& g = fr.grid;
  if (i == 0 || j == 0 || i + 1 >= g.nx || j + 1 >= g.ny) return false;
  for (std::size_t jj = j - 1; jj <= j + 1; ++jj)
    for (std::size_t ii = i - 1; ii <= i + 1; ++ii)
      if (!fr.valid(ii, jj) || field.is_singular(ii, jj)) return false;
  return true;
}

inline void require_frame(const FrameField& fr, const OmegaField& field) {
  if (!(fr.grid == field.grid)) throw Error(ErrorCode::GridMismatch, "frame and field grids differ");
  if (fr.grid.nx < 3 || fr.grid.ny < 3) throw Error(ErrorCode::TooFewNodes, "need at least 3×3 nodes");
}

}  // namespace detail

struct IsometryReport {
  ResidualStats isometry;  // worst of rho|F_x|^2 - ch^2, rho|F_y|^2 - sh^2, rho<F_x, F_y>
  double hopf_real_err = 0.0;  // max |Re Q - 1/4|
  double hopf_imag_err = 0.0;  // max |Im Q|
};

/// Conformality of F: centered differences of the chart grid against the
/// metric cosh^2(omega)|dz|^2, and the Hopf quantity
/// Q = (rho|F_x|^2 - rho|F_y|^2 + 2i rho<F_x, F_y>)/4, which must equal 1/4.
inline IsometryReport isometry_check(const FrameField& fr, const OmegaField& field) {
  detail::require_frame(fr, field);
  const GridSpec& g = fr.grid;
  ResidualAccumulator acc(std::max(g.hx(), g.hy()));
  IsometryReport rep;
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      if (!detail::frame_block(fr, field, i, j)) continue;
      const double a1 = fd::dx(fr.u1, i, j), a2 = fd::dx(fr.u2, i, j);
      const double b1 = fd::dy(fr.u1, i, j), b2 = fd::dy(fr.u2, i, j);
      const double rho = chart_factor(fr.space, fr.u1(i, j), fr.u2(i, j)).rho;
      const double w = field.omega(i, j);
      const double ex = rho * (a1 * a1 + a2 * a2), ey = rho * (b1 * b1 + b2 * b2);
      const double exy = rho * (a1 * b1 + a2 * b2);
      const double ch = std::cosh(w), sh = std::sinh(w);
      const double r1 = ex - ch * ch, r2 = ey - sh * sh;
      acc.add(std::max({std::abs(r1), std::abs(r2), std::abs(exy)}));
      rep.hopf_real_err = std::max(rep.hopf_real_err, std::abs(0.25 * (ex - ey) - 0.25));
      rep.hopf_imag_err = std::max(rep.hopf_imag_err, std::abs(0.5 * exy));
    }
  rep.isometry = acc.stats();
  return rep;
}

/// Residual of  F_{z zbar} + (log rho)_u F_z F_zbar = 0  on the chart grid.
inline ResidualStats harmonic_residual(const FrameField& fr, const OmegaField& field) {
  detail::require_frame(fr, field);
  const GridSpec& g = fr.grid;
  ResidualAccumulator acc(std::max(g.hx(), g.hy()));
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      if (!detail::frame_block(fr, field, i, j)) continue;
      const cplx fx(fd::dx(fr.u1, i, j), fd::dx(fr.u2, i, j));
      const cplx fy(fd::dy(fr.u1, i, j), fd::dy(fr.u2, i, j));
      const cplx lap(fd::laplacian(fr.u1, i, j), fd::laplacian(fr.u2, i, j));
      const cplx fz = 0.5 * (fx - cplx(0, 1) * fy), fzb = 0.5 * (fx + cplx(0, 1) * fy);
      const auto [l1, l2] = chart_factor(fr.space, fr.u1(i, j), fr.u2(i, j)).grad_log_rho;
      const cplx lu = 0.5 * cplx(l1, -l2);
      acc.add(std::abs(0.25 * lap + lu * fz * fzb));
    }
  return acc.stats();
}

struct MeshVertex {
  std::size_t i = 0, j = 0;
  std::array<double, 3> chart{};    // (u1, u2, t)
  std::array<double, 3> model{};    // ambient model point of F (hyperboloid, plane or sphere)
};

/// Immersion samples. The ambient point of a vertex is (model, t): in R^{2,1}×R,
/// R^2×R or R^3×R.
struct SurfaceMesh {
  GridSpec grid;
  ChartSpace space;
  std::optional<ModuliPoint> params;
  std::vector<MeshVertex> vertices;
  std::vector<std::array<std::size_t, 4>> faces;         // counter-clockwise in (x, y)
  std::vector<std::vector<std::size_t>> foliation;     // constant-y polylines

  double max_lift_defect() const {
    double m = 0.0;
    for (const auto& v : vertices) m = std::max(m, lift_constraint_defect(space, v.model));
    return m;
  }
};

namespace detail {

template <typename Point>
SurfaceMesh assemble_mesh(const GridSpec& g, const ChartSpace& space, const Mask& keep, Point&& point) {
  SurfaceMesh mesh;
  mesh.grid = g;
  mesh.space = space;
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(g.size(), none);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (!keep(i, j)) continue;
      index[g.index(i, j)] = mesh.vertices.size();
      mesh.vertices.push_back(point(i, j));
    }
  for (std::size_t j = 0; j + 1 < g.ny; ++j)
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const std::array<std::size_t, 4> q{index[g.index(i, j)], index[g.index(i + 1, j)],
                                         index[g.index(i + 1, j + 1)], index[g.index(i, j + 1)]};
      if (std::none_of(q.begin(), q.end(), [](std::size_t v) { return v == none; }))
        mesh.faces.push_back(q);
    }
  for (std::size_t j = 0; j < g.ny; ++j) {
    std::vector<std::size_t> run;
    for (std::size_t i = 0; i <= g.nx; ++i) {
      const std::size_t v = i < g.nx ? index[g.index(i, j)] : none;
      if (v != none) {
        run.push_back(v);
        continue;
      }
      if (run.size() >= 2) mesh.foliation.push_back(run);
      run.clear();
    }
  }
  return mesh;
}

}  // namespace detail

/// Mesh of X = (F, y) over the nodes reached by the frame, skipping singular
/// nodes; quads only over cells whose four corners survive.
inline SurfaceMesh build_mesh(const FrameField& fr, const OmegaField& field) {
  detail::require_frame(fr, field);
  const GridSpec& g = fr.grid;
  Mask keep(g, 0);
  for (std::size_t k = 0; k < g.size(); ++k) keep.data[k] = fr.valid.data[k] && !field.singular.data[k];
  return detail::assemble_mesh(g, fr.space, keep, [&](std::size_t i, std::size_t j) {
    const double a = fr.u1(i, j), b = fr.u2(i, j);
    return MeshVertex{i, j, {a, b, g.y(j)}, ambient_lift(fr.space, a, b)};
  });
}

/// Flat case through the Weierstrass representation. With h = omega + i psi
/// holomorphic, X = Re ∫ (cosh h, -i sinh h, -i) dz, i.e. Gauss map
/// g = -i e^h and height differential -i dz, so that the third coordinate is y.
/// Path integrals follow the frame's path (seed column, then rows) with the
/// end-corrected trapezoid rule; X(seed) = (u0, y_seed).
inline SurfaceMesh weierstrass_flat(const OmegaField& field, const FrameField& fr) {
  if (field.c0 != 0.0 || fr.space.kind != ChartKind::EuclideanPlane)
    throw Error(ErrorCode::NotFlat, "Weierstrass data need c0 = 0");
  detail::require_frame(fr, field);
  const GridSpec& g = fr.grid;
  const auto src = omega_source(field);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // Holomorphic h and h' = omega_x - i omega_y at each reached node.
  std::vector<cplx> hv(g.size(), cplx(nan, nan)), dh(g.size(), cplx(nan, nan));
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (!fr.valid(i, j) || field.is_singular(i, j)) continue;
      const auto s = src->sample(g.x(i), g.y(j));
      if (!s) continue;
      hv[g.index(i, j)] = cplx(s->omega, fr.psi(i, j));
      dh[g.index(i, j)] = cplx(s->omega_x, -s->omega_y);
    }
  auto phi = [](cplx h) { return std::array<cplx, 3>{std::cosh(h), cplx(0, -1) * std::sinh(h), cplx(0, -1)}; };
  auto dphi = [](cplx h, cplx d) {
    return std::array<cplx, 3>{std::sinh(h) * d, cplx(0, -1) * std::cosh(h) * d, cplx(0, 0)};
  };
  auto ok = [&](std::size_t k) { return std::isfinite(hv[k].real()) && std::isfinite(hv[k].imag()); };

  std::vector<std::array<double, 3>> X(g.size(), {nan, nan, nan});
  Mask keep(g, 0);
  // Re ∫ Phi dz over the segment a -> b = a + dz, with Phi' corrections.
  auto segment = [&](std::size_t a, std::size_t b, cplx dz) {
    const auto pa = phi(hv[a]), pb = phi(hv[b]);
    const auto da = dphi(hv[a], dh[a]), db = dphi(hv[b], dh[b]);
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
      const cplx v = 0.5 * dz * (pa[c] + pb[c]) - dz * dz / 12.0 * (db[c] - da[c]);
      out[static_cast<std::size_t>(c)] = v.real();
    }
    return out;
  };
  auto walk = [&](std::size_t i, std::size_t j, bool along_x, int dir) {
    std::size_t k = along_x ? i : j;
    const std::size_t n = along_x ? g.nx : g.ny;
    const cplx dz = along_x ? cplx(g.hx() * dir, 0) : cplx(0, g.hy() * dir);
    while ((dir > 0 && k + 1 < n) || (dir < 0 && k > 0)) {
      const std::size_t next = dir > 0 ? k + 1 : k - 1;
      const std::size_t a = along_x ? g.index(k, j) : g.index(i, k);
      const std::size_t b = along_x ? g.index(next, j) : g.index(i, next);
      if (!ok(b)) return;
      const auto d = segment(a, b, dz);
      for (int c = 0; c < 3; ++c) X[b][static_cast<std::size_t>(c)] = X[a][static_cast<std::size_t>(c)] + d[static_cast<std::size_t>(c)];
      keep.data[b] = 1;
      k = next;
    }
  };
  const std::size_t s = g.index(fr.seed_i, fr.seed_j);
  if (!ok(s)) throw Error(ErrorCode::SingularCrossing, "seed node is singular");
  X[s] = {fr.seed_state.u1, fr.seed_state.u2, g.y(fr.seed_j)};
  keep.data[s] = 1;
  for (int dir : {+1, -1}) walk(fr.seed_i, fr.seed_j, false, dir);
  for (std::size_t j = 0; j < g.ny; ++j) {
    if (!keep(fr.seed_i, j)) continue;
    for (int dir : {+1, -1}) walk(fr.seed_i, j, true, dir);
  }
  return detail::assemble_mesh(g, fr.space, keep, [&](std::size_t i, std::size_t j) {
    const auto& p = X[g.index(i, j)];
    return MeshVertex{i, j, {p[0], p[1], p[2]}, {p[0], p[1], 0.0}};
  });
}

/// Geodesic curvature of each constant-y chart curve, measured from the chart
/// points alone: Menger (circumcircle) curvature k_e through consecutive
/// nodes, left normal n from the circumcentre, and
/// k_g = k_e/sqrt(rho) - <grad log rho, n>/(2 sqrt(rho)).
inline ScalarGrid row_geodesic_curvature(const FrameField& fr, const OmegaField& field) {
  detail::require_frame(fr, field);
  const GridSpec& g = fr.grid;
  ScalarGrid k(g, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      bool usable = true;
      for (std::size_t ii = i - 1; ii <= i + 1; ++ii)
        usable = usable && fr.valid(ii, j) && !field.is_singular(ii, j);
      if (!usable) continue;
      const cplx a(fr.u1(i - 1, j), fr.u2(i - 1, j)), b(fr.u1(i, j), fr.u2(i, j)),
          c(fr.u1(i + 1, j), fr.u2(i + 1, j));
      const cplx ab = b - a, bc = c - b, ac = c - a;
      const double cross = ab.real() * bc.imag() - ab.imag() * bc.real();
      const double ke = 2.0 * cross / (std::abs(ab) * std::abs(bc) * std::abs(ac));
      cplx n = cplx(0, 1) * ac / std::abs(ac);
      if (std::abs(ke) * std::abs(ac) > 1e-9) {
        // Circumcentre relative to b, then the unit normal pointing to it.
        const cplx p = a - b, q = c - b;
        const double d = 2.0 * (p.real() * q.imag() - p.imag() * q.real());
        const cplx centre((q.imag() * std::norm(p) - p.imag() * std::norm(q)) / d,
                          (p.real() * std::norm(q) - q.real() * std::norm(p)) / d);
        n = centre / std::abs(centre) * (ke > 0 ? 1.0 : -1.0);
      }
      const ChartFactor cf = chart_factor(fr.space, b.real(), b.imag());
      const double sr = std::sqrt(cf.rho);
      const double dot = cf.grad_log_rho[0] * n.real() + cf.grad_log_rho[1] * n.imag();
      k(i, j) = ke / sr - dot / (2.0 * sr);
    }
  return k;
}

/// A chart isometry in the form z -> (a z + b)/(c z + d), normalised to unit
/// determinant.
struct Mobius {
  cplx a{1, 0}, b{0, 0}, c{0, 0}, d{1, 0};

  cplx apply(cplx z) const { return (a * z + b) / (c * z + d); }
  cplx deriv(cplx z) const { return (a * d - b * c) / ((c * z + d) * (c * z + d)); }
  Mobius operator*(const Mobius& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mobius normalized() const {
    const cplx s = std::sqrt(a * d - b * c);
    return {a / s, b / s, c / s, d / s};
  }
};

/// The chart isometry carrying the frame (p, psi_p) to (q, psi_q).
inline Mobius isometry_between(const ChartSpace& space, cplx p, double psi_p, cplx q, double psi_q) {
  const cplx rot = std::polar(1.0, psi_q - psi_p);
  const Mobius r{rot, 0, 0, 1};
  switch (space.kind) {
    case ChartKind::PoincareDisk: {
      const Mobius to0{1, -p, -std::conj(p), 1}, from0{1, q, std::conj(q), 1};
      return (from0 * r * to0).normalized();
    }
    case ChartKind::Stereographic: {
      const Mobius to0{1, -p, std::conj(p), 1}, from0{1, q, -std::conj(q), 1};
      return (from0 * r * to0).normalized();
    }
    case ChartKind::EuclideanPlane: break;
  }
  return (Mobius{1, q, 0, 1} * r * Mobius{1, -p, 0, 1}).normalized();
}

struct HolonomyReport {
  std::string type;  // identity, rotation, translation, parabolic, hyperbolic
  double angle_or_length = 0.0;
  std::optional<cplx> fixed_point;
  double residual = 0.0;
  bool closed = false;
  Mobius map;
};

namespace detail {

inline double wrap_angle(double t) {
  t = std::remainder(t, 2.0 * std::numbers::pi);
  return t;
}

inline void classify_isometry(const ChartSpace& space, HolonomyReport& rep) {
  const Mobius& m = rep.map;
  auto dist = [&](double sign) {
    return std::max({std::abs(m.a - sign), std::abs(m.b), std::abs(m.c), std::abs(m.d - sign)});
  };
  rep.closed = std::min(dist(1.0), dist(-1.0)) <= 1e-6;
  if (rep.closed) {
    rep.type = "identity";
    rep.angle_or_length = 0.0;
    return;
  }
  const double tr = std::abs((m.a + m.d).real());
  const double scale = space.c0 == 0.0 ? 1.0 : 1.0 / std::sqrt(std::abs(space.c0));
  auto elliptic = [&] {
    // Fixed point: c z^2 + (d - a) z - b = 0, the root nearest the origin.
    cplx z;
    if (std::abs(m.c) < 1e-14) {
      z = std::abs(m.d - m.a) < 1e-14 ? cplx(0, 0) : m.b / (m.d - m.a);
    } else {
      const cplx disc = std::sqrt((m.d - m.a) * (m.d - m.a) + 4.0 * m.b * m.c);
      const cplx z1 = (m.a - m.d + disc) / (2.0 * m.c), z2 = (m.a - m.d - disc) / (2.0 * m.c);
      z = std::abs(z1) <= std::abs(z2) ? z1 : z2;
    }
    rep.type = "rotation";
    rep.fixed_point = z;
    rep.angle_or_length = std::arg(m.deriv(z));
  };
  switch (space.kind) {
    case ChartKind::Stereographic: elliptic(); return;
    case ChartKind::PoincareDisk:
      if (tr < 2.0 - 1e-12) {
        elliptic();
      } else if (tr <= 2.0 + 1e-12) {
        rep.type = "parabolic";
        rep.angle_or_length = 0.0;
      } else {
        rep.type = "hyperbolic";
        rep.angle_or_length = 2.0 * std::acosh(tr / 2.0) * scale;
      }
      return;
    case ChartKind::EuclideanPlane: {
      // a/d = e^{i theta}, translation b/d.
      const cplx e = m.a / m.d, t = m.b / m.d;
      if (std::abs(e - 1.0) <= 1e-12) {
        rep.type = "translation";
        rep.angle_or_length = std::abs(t);
      } else {
        rep.type = "rotation";
        rep.fixed_point = t / (1.0 - e);
        rep.angle_or_length = std::arg(e);
      }
      return;
    }
  }
}

}  // namespace detail

/// Compares the frame along the seed row at x and x + period. The isometry is
/// built from the first reached node of the row and its translate; the residual is the worst
/// misfit of that isometry over every node whose translate stays in the
/// reached part of the row (chart distance and frame-angle mismatch).
inline HolonomyReport holonomy(const FrameField& fr, const OmegaField& field, double period,
                               std::size_t substeps = 4) {
  detail::require_frame(fr, field);
  if (!(period > 0.0) || !std::isfinite(period))
    throw Error(ErrorCode::PeriodUnavailable, "no finite positive period");
  const GridSpec& g = fr.grid;
  const std::size_t j = fr.seed_j;
  const auto src = omega_source(field);
  const double h = g.hx();
  std::size_t first = fr.seed_i, last = fr.seed_i;
  while (first > 0 && fr.valid(first - 1, j)) --first;
  while (last + 1 < g.nx && fr.valid(last + 1, j)) ++last;

  // State at x_i + period: from the reached node below, finish with RK4.
  auto translate = [&](std::size_t i) -> std::optional<FrameState> {
    const double target = g.x(i) + period;
    const auto k = static_cast<std::size_t>(std::floor((target - g.x0) / h + 1e-9));
    if (k > last) return std::nullopt;
    FrameState st = fr.state(k, j);
    const double rest = target - g.x(k);
    if (rest > 1e-14 * std::max(1.0, std::abs(target))) {
      const double step = rest / static_cast<double>(substeps);
      double x = g.x(k);
      for (std::size_t s = 0; s < substeps; ++s, x += step)
        if (detail::frame_step(*src, fr.space, x, g.y(j), true, step, st))
          throw Error(ErrorCode::PeriodUnavailable, "translated frame hits the singular set");
    }
    return st;
  };

  const std::size_t ia = first;
  const auto sb = translate(ia);
  if (!sb) throw Error(ErrorCode::PeriodUnavailable, "reached row is shorter than one period");
  const FrameState sa = fr.state(ia, j);
  HolonomyReport rep;
  rep.map = isometry_between(fr.space, cplx(sa.u1, sa.u2), sa.psi, cplx(sb->u1, sb->u2), sb->psi);
  for (std::size_t i = ia; i <= last; ++i) {
    const auto t = translate(i);
    if (!t) break;
    const cplx z(fr.u1(i, j), fr.u2(i, j));
    const cplx w = rep.map.apply(z);
    const double angle = fr.psi(i, j) + std::arg(rep.map.deriv(z));
    rep.residual = std::max({rep.residual, std::abs(w - cplx(t->u1, t->u2)),
                             std::abs(detail::wrap_angle(angle - t->psi))});
  }
  detail::classify_isometry(fr.space, rep);
  return rep;
}

}  // namespace foliata
