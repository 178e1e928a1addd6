#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "foliata/error.hpp"
#include "foliata/moduli.hpp"

namespace foliata {

enum class ProfileKind { F, G };

constexpr const char* to_string(ProfileKind k) { return k == ProfileKind::F ? "F" : "G"; }

/// The one-variable problem for f (or g):  -q'' = 2 q^3 + coef q  with first
/// integral  q'^2 + q^4 + coef q^2 + constant = 0.
struct ProfileEquation {
  double coef = 0.0;
  double constant = 0.0;

  static ProfileEquation of(const DerivedParams& dp, ProfileKind kind) {
    return kind == ProfileKind::F ? ProfileEquation{dp.cbar, dp.c} : ProfileEquation{dp.dbar, dp.d};
  }

  double accel(double q) const { return -(2.0 * q * q * q + coef * q); }
  double first_integral(double q, double dq) const {
    const double q2 = q * q;
    return dq * dq + q2 * q2 + coef * q2 + constant;
  }
};

struct ProfileState {
  double q = 0.0;
  double dq = 0.0;
};

namespace detail {

/// Classical fourth-order increment for the state over a step h.
inline ProfileState rk4_increment(const ProfileEquation& eq, ProfileState s, double h) {
  const double k1q = s.dq, k1p = eq.accel(s.q);
  const double k2q = s.dq + 0.5 * h * k1p, k2p = eq.accel(s.q + 0.5 * h * k1q);
  const double k3q = s.dq + 0.5 * h * k2p, k3p = eq.accel(s.q + 0.5 * h * k2q);
  const double k4q = s.dq + h * k3p, k4p = eq.accel(s.q + h * k3q);
  return {h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
          h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
}

inline ProfileState rk4_step(const ProfileEquation& eq, ProfileState s, double h) {
  const ProfileState inc = rk4_increment(eq, s, h);
  return {s.q + inc.q, s.dq + inc.dq};
}

/// Kahan-compensated accumulation of RK4 increments; keeps the round-off walk
/// of long integrations below the truncation error.
class CompensatedMarch {
 public:
  CompensatedMarch(const ProfileEquation& eq, ProfileState s) : eq_(eq), s_(s) {}

  const ProfileState& state() const { return s_; }

  void step(double h) {
    const ProfileState inc = rk4_increment(eq_, s_, h);
    add(s_.q, comp_.q, inc.q);
    add(s_.dq, comp_.dq, inc.dq);
  }

 private:
  static void add(double& sum, double& comp, double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  ProfileEquation eq_;
  ProfileState s_;
  ProfileState comp_{};
};

}  // namespace detail

/// Range [m, M] of attainable q^2.
struct AdmissibleInterval {
  double m = 0.0;
  double M = 0.0;
};

inline AdmissibleInterval admissible_interval(const DerivedParams& dp, ProfileKind kind) {
  if (!dp.has_roots())
    throw Error(ErrorCode::NoRealSolution, "negative discriminant " + std::to_string(dp.delta));
  const double lo = kind == ProfileKind::F ? *dp.xminus : *dp.yminus;
  const double hi = kind == ProfileKind::F ? *dp.xplus : *dp.yplus;
  if (hi < 0.0 && !near_zero(hi))
    throw Error(ErrorCode::NoRealSolution, std::string("largest root of the ") + to_string(kind) +
                                               " quadratic is negative");
  return {std::max(0.0, lo), std::max(0.0, hi)};
}

struct ProfileOptions {
  double tolerance = 1e-9;  // first-integral drift budget
  double phase = 0.0;       // sample q(x + phase) of the canonical solution
  bool trivial = false;     // select the constant branch q = 0 (needs constant == 0)
};

/// Sampled solution on a uniform grid x0 + i*h, i = 0..n-1.
struct ProfileSolution {
  ProfileKind kind = ProfileKind::F;
  double x0 = 0.0;
  double h = 0.0;
  std::vector<double> values;
  std::vector<double> derivs;
  DerivedParams params;
  double first_integral_drift = 0.0;
  std::optional<double> period;
  double phase = 0.0;
  bool trivial = false;

  ProfileEquation equation() const { return ProfileEquation::of(params, kind); }
  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * h; }
  double x_end() const { return x(values.size() - 1); }
  bool covers(double lo, double hi) const {
    const double slack = 1e-9 * std::max(1.0, h);
    return lo >= x0 - slack && hi <= x_end() + slack;
  }

  /// (q, q') at an arbitrary abscissa: one RK4 step from the nearest sample.
  ProfileState eval(double x) const {
    if (trivial) return {};
    const double t = (x - x0) / h;
    const auto last = static_cast<long long>(values.size()) - 1;
    const long long i = std::clamp<long long>(std::llround(t), 0, last);
    const ProfileState s{values[static_cast<std::size_t>(i)], derivs[static_cast<std::size_t>(i)]};
    const double dx = x - this->x(static_cast<std::size_t>(i));
    if (std::abs(dx) <= 1e-14 * std::max(1.0, std::abs(x))) return s;
    return detail::rk4_step(equation(), s, dx);
  }
};

namespace detail {

/// Trapezoid rule on [0, pi/2] for an integrand that is an even, pi-periodic
/// function of theta; converges spectrally.
template <typename Fn>
double periodic_quarter_integral(Fn&& fn) {
  double prev = 0.0;
  for (std::size_t n = 16; n <= (std::size_t{1} << 22); n *= 2) {
    const double h = 0.5 * std::numbers::pi / static_cast<double>(n);
    double sum = 0.5 * (fn(0.0) + fn(0.5 * std::numbers::pi));
    for (std::size_t k = 1; k < n; ++k) sum += fn(h * static_cast<double>(k));
    const double cur = sum * h;
    if (n > 16 && std::abs(cur - prev) <= 1e-15 * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace detail

/// Full period of an oscillating profile by quadrature of dq / sqrt(-P(q^2)).
/// The endpoint square-root singularities are removed by the substitutions
/// q = sqrt(M) sin(theta) (sign-changing case) and
/// q^2 = m + (M - m) sin^2(theta) (constant-sign case).
inline double profile_period(const DerivedParams& dp, ProfileKind kind) {
  const auto [m, M] = admissible_interval(dp, kind);
  const double scale = std::max(1.0, std::max(dp.cbar * dp.cbar, dp.dbar * dp.dbar));
  if (dp.delta <= 0.0 || near_zero(dp.delta, scale) || !(M > m))
    throw Error(ErrorCode::NonOscillatory, "degenerate admissible interval");
  const double lo = kind == ProfileKind::F ? *dp.xminus : *dp.yminus;
  if (lo < 0.0 && !near_zero(lo)) {
    const double quarter = detail::periodic_quarter_integral([&](double th) {
      const double s = std::sin(th);
      return 1.0 / std::sqrt(M * s * s - lo);
    });
    return 4.0 * quarter;
  }
  if (m > 0.0 && !near_zero(m)) {
    const double half = detail::periodic_quarter_integral([&](double th) {
      const double s = std::sin(th);
      return 1.0 / std::sqrt(m + (M - m) * s * s);
    });
    return 2.0 * half;
  }
  // Lower root exactly zero: the orbit is the separatrix through q = 0.
  throw Error(ErrorCode::NonOscillatory, "separatrix orbit (zero root) has no finite period");
}

/// Canonical state at x + phase = 0.
inline ProfileState canonical_initial_state(const DerivedParams& dp, ProfileKind kind, bool trivial) {
  const ProfileEquation eq = ProfileEquation::of(dp, kind);
  if (trivial) {
    if (!near_zero(eq.constant))
      throw Error(ErrorCode::InvalidParams, "the constant branch q = 0 requires a zero constant");
    return {};
  }
  const auto [m, M] = admissible_interval(dp, kind);
  if (m > 0.0) return {std::sqrt(m), 0.0};
  if (eq.constant < 0.0 && !near_zero(eq.constant)) return {0.0, std::sqrt(-eq.constant)};
  return {std::sqrt(M), 0.0};
}

inline ProfileSolution integrate_profile(const DerivedParams& dp, ProfileKind kind, double x0,
                                         double x1, double step, const ProfileOptions& opt = {}) {
  if (!(step > 0.0) || !(x1 > x0))
    throw Error(ErrorCode::InvalidParams, "integration range and step must be positive");
  const ProfileState start = canonical_initial_state(dp, kind, opt.trivial);
  const ProfileEquation eq = ProfileEquation::of(dp, kind);

  ProfileSolution sol;
  sol.kind = kind;
  sol.params = dp;
  sol.phase = opt.phase;
  sol.trivial = opt.trivial;
  sol.x0 = x0;
  const auto n = static_cast<std::size_t>(std::max<long long>(1, std::llround((x1 - x0) / step)));
  sol.h = (x1 - x0) / static_cast<double>(n);
  sol.values.assign(n + 1, 0.0);
  sol.derivs.assign(n + 1, 0.0);
  if (opt.trivial) return sol;

  // Carry the canonical state to the first sample, then march the grid.
  detail::CompensatedMarch march(eq, start);
  const double t_start = x0 + opt.phase;
  if (t_start != 0.0) {
    const auto k = static_cast<std::size_t>(std::ceil(std::abs(t_start) / sol.h));
    const double hs = t_start / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) march.step(hs);
  }
  double drift = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    if (i > 0) march.step(sol.h);
    const ProfileState& s = march.state();
    sol.values[i] = s.q;
    sol.derivs[i] = s.dq;
    drift = std::max(drift, std::abs(eq.first_integral(s.q, s.dq)));
  }
  sol.first_integral_drift = drift;
  if (!(drift <= 100.0 * opt.tolerance))
    throw Error(ErrorCode::DriftExceeded,
                "first-integral drift " + std::to_string(drift) + " (step too large?)");
  try {
    sol.period = profile_period(dp, kind);
  } catch (const Error&) {
    sol.period.reset();
  }
  return sol;
}

namespace detail {

/// Root of the cubic Hermite interpolant of (q, dq) on [a, b], assuming a sign
/// change of q.
inline double hermite_root(double a, double b, double qa, double qb, double da, double db) {
  const double h = b - a;
  auto p = [&](double s) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * qa + (s3 - 2 * s2 + s) * h * da + (-2 * s3 + 3 * s2) * qb +
           (s3 - s2) * h * db;
  };
  double lo = 0.0, hi = 1.0, plo = p(lo);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = p(mid);
    if ((pm < 0.0) == (plo < 0.0)) {
      lo = mid;
      plo = pm;
    } else {
      hi = mid;
    }
  }
  return a + 0.5 * (lo + hi) * h;
}

}  // namespace detail

/// Period measured on the sampled trajectory: spacing of alternate zero
/// crossings of q (sign-changing orbits) or of q' (constant-sign orbits).
inline double crossing_period(const ProfileSolution& sol) {
  if (sol.trivial || sol.size() < 3)
    throw Error(ErrorCode::NonOscillatory, "no oscillation to measure");
  const ProfileEquation eq = sol.equation();
  const auto [m, M] = admissible_interval(sol.params, sol.kind);
  const bool through_zero = !(m > 0.0);
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < sol.size(); ++i) {
    double qa, qb, da, db;
    if (through_zero) {
      qa = sol.values[i], qb = sol.values[i + 1];
      da = sol.derivs[i], db = sol.derivs[i + 1];
    } else {
      qa = sol.derivs[i], qb = sol.derivs[i + 1];
      da = eq.accel(sol.values[i]), db = eq.accel(sol.values[i + 1]);
    }
    if (qa == 0.0) {
      crossings.push_back(sol.x(i));
      continue;
    }
    if ((qa < 0.0) != (qb < 0.0) && qb != 0.0)
      crossings.push_back(detail::hermite_root(sol.x(i), sol.x(i + 1), qa, qb, da, db));
  }
  if (crossings.size() < 3)
    throw Error(ErrorCode::NonOscillatory, "fewer than three crossings in the sampled range");
  // Alternate crossings are one full period apart.
  const std::size_t k = (crossings.size() - 1) / 2 * 2;
  return (crossings[k] - crossings[0]) * 2.0 / static_cast<double>(k);
}

struct DegenerateConstants {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Constants of the tangent solution on the Gamma curve (c0 = -1, delta = 0).
inline DegenerateConstants degenerate_constants(const ModuliPoint& p) {
  if (p.c0 != -1.0) throw Error(ErrorCode::InvalidParams, "degenerate family requires c0 = -1");
  const double delta = (1.0 + p.c - p.d) * (1.0 + p.c - p.d) - 4.0 * p.c;
  if (!near_zero(delta, std::max(1.0, (1.0 + p.c - p.d) * (1.0 + p.c - p.d))))
    throw Error(ErrorCode::NotDegenerate, "discriminant " + std::to_string(delta) + " is not zero");
  const double a2 = 0.5 * (1.0 + p.c - p.d);
  const double b2 = 0.5 * (1.0 + p.d - p.c);
  if (a2 < -1e-12 || b2 < -1e-12)
    throw Error(ErrorCode::InvalidParams, "point lies on the discriminant curve outside c-1 <= d <= c+1");
  return {std::sqrt(std::max(0.0, a2)), std::sqrt(std::max(0.0, b2))};
}

}  // namespace foliata
