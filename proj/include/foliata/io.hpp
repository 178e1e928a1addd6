#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "foliata/build.hpp"
#include "foliata/error.hpp"
#include "foliata/field.hpp"
#include "foliata/grid.hpp"
#include "foliata/immersion.hpp"
#include "foliata/moduli.hpp"
#include "foliata/profile.hpp"

// Serialisation: JSON documents (nlohmann, shortest round-trip doubles), CSV
// tables and OBJ meshes. No timestamps, so identical inputs give identical
// bytes.

namespace foliata::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const ResidualStats& s) {
  return {{"linf", number_or_null(s.linf)}, {"l2", number_or_null(s.l2)}, {"h", s.grid_h}, {"count", s.count}};
}

inline json to_json(const GridSpec& g) {
  return {{"domain", {g.x0, g.x1, g.y0, g.y1}}, {"nx", g.nx}, {"ny", g.ny}};
}

inline json to_json(const DerivedParams& dp) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"a", dp.a},          {"cbar", dp.cbar},          {"dbar", dp.dbar},
          {"delta", dp.delta},  {"xminus", opt(dp.xminus)}, {"xplus", opt(dp.xplus)},
          {"yminus", opt(dp.yminus)}, {"yplus", opt(dp.yplus)}};
}

inline json classify_json(const ModuliPoint& p, const RegionReport& r) {
  json cert = json::array();
  for (const auto& e : r.certificate) cert.push_back({{"name", e.name}, {"value", e.value}, {"ok", e.ok}});
  return {{"c0", p.c0}, {"c", p.c}, {"d", p.d}, {"label", std::string(to_string(r.label))},
          {"certificate", cert}, {"derived", to_json(r.derived)}};
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanCell>& cells) {
  os << "c,d,label\n";
  for (const auto& cell : cells)
    os << json(cell.c).dump() << ',' << json(cell.d).dump() << ',' << to_string(cell.label) << '\n';
}

inline void write_profile_csv(std::ostream& os, const ProfileSolution& sol) {
  const char* q = sol.kind == ProfileKind::F ? "f" : "g";
  os << (sol.kind == ProfileKind::F ? "x" : "y") << ',' << q << ',' << q
     << (sol.kind == ProfileKind::F ? "_x" : "_y") << '\n';
  for (std::size_t i = 0; i < sol.size(); ++i)
    os << json(sol.x(i)).dump() << ',' << json(sol.values[i]).dump() << ','
       << json(sol.derivs[i]).dump() << '\n';
}

inline json profile_sidecar(const ProfileSolution& sol) {
  const auto& dp = sol.params;
  return {{"kind", to_string(sol.kind)},
          {"params", {{"c0", dp.c0}, {"c", dp.c}, {"d", dp.d}, {"a", dp.a}}},
          {"period", sol.period ? json(*sol.period) : json(nullptr)},
          {"first_integral_drift", sol.first_integral_drift}};
}

inline std::string_view to_string(FieldMode m) {
  switch (m) {
    case FieldMode::Auto: return "auto";
    case FieldMode::Reconstruct: return "reconstruct";
    case FieldMode::Degenerate: return "degenerate";
    case FieldMode::Relax: return "relax";
  }
  return "auto";
}

inline FieldMode field_mode_from(const std::string& s) {
  if (s == "auto") return FieldMode::Auto;
  if (s == "reconstruct") return FieldMode::Reconstruct;
  if (s == "degenerate") return FieldMode::Degenerate;
  if (s == "relax") return FieldMode::Relax;
  throw Error(ErrorCode::InvalidParams, "unknown field mode '" + s + "'");
}

inline json to_json(const FieldRequest& r) {
  return {{"c0", r.point.c0},         {"c", r.point.c},
          {"d", r.point.d},           {"a", r.point.a},
          {"domain", {r.grid.x0, r.grid.x1, r.grid.y0, r.grid.y1}},
          {"nx", r.grid.nx},          {"ny", r.grid.ny},
          {"mode", std::string(to_string(r.mode))},
          {"trivial_f", r.trivial_f}, {"trivial_g", r.trivial_g},
          {"profile_step", r.profile_step}, {"tolerance", r.tolerance},
          {"bump", r.bump}};
}

inline FieldRequest field_request_from(const json& j) {
  FieldRequest r;
  r.point = {j.at("c0").get<double>(), j.at("c").get<double>(), j.at("d").get<double>(),
             j.value("a", 0.0)};
  const auto& dom = j.at("domain");
  r.grid = {dom.at(0).get<double>(), dom.at(1).get<double>(), dom.at(2).get<double>(),
            dom.at(3).get<double>(), j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>()};
  r.mode = field_mode_from(j.value("mode", std::string("auto")));
  r.trivial_f = j.value("trivial_f", false);
  r.trivial_g = j.value("trivial_g", false);
  r.profile_step = j.value("profile_step", 0.0);
  r.tolerance = j.value("tolerance", 1e-9);
  r.bump = j.value("bump", 0.1);
  return r;
}

/// Field file: {c0, domain, nx, ny, provenance, omega (null on the singular
/// set), mask, config}.
inline json field_json(const OmegaField& f, const json& config) {
  json omega = json::array(), mask = json::array();
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    omega.push_back(f.singular.data[k] ? json(nullptr) : json(f.omega.data[k]));
    mask.push_back(static_cast<int>(f.singular.data[k]));
  }
  json out = {{"c0", f.c0},
              {"domain", {f.grid.x0, f.grid.x1, f.grid.y0, f.grid.y1}},
              {"nx", f.grid.nx},
              {"ny", f.grid.ny},
              {"provenance", std::string(to_string(f.provenance))},
              {"omega", omega},
              {"mask", mask}};
  out["config"] = config;
  out["version"] = kVersion;
  return out;
}

inline Provenance provenance_from(const std::string& s) {
  if (s == "Reconstructed") return Provenance::Reconstructed;
  if (s == "Degenerate") return Provenance::Degenerate;
  if (s == "Relaxation") return Provenance::Relaxation;
  throw Error(ErrorCode::InvalidParams, "unknown provenance '" + s + "'");
}

/// Reads a field file. The closed-form source is reattached from the "config"
/// block when it describes a reconstructed or degenerate field on the same
/// grid; the stored omega values are kept as written.
inline OmegaField read_field(const json& j) {
  OmegaField f;
  try {
    const auto& dom = j.at("domain");
    f.grid = {dom.at(0).get<double>(), dom.at(1).get<double>(), dom.at(2).get<double>(),
              dom.at(3).get<double>(), j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>()};
    f.grid.validate();
    f.c0 = j.at("c0").get<double>();
    f.provenance = provenance_from(j.at("provenance").get<std::string>());
    const auto& omega = j.at("omega");
    const auto& mask = j.at("mask");
    if (omega.size() != f.grid.size() || mask.size() != f.grid.size())
      throw Error(ErrorCode::GridMismatch, "omega/mask length differs from nx*ny");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    f.omega = ScalarGrid(f.grid, nan);
    f.sinh_omega = ScalarGrid(f.grid, nan);
    f.singular = Mask(f.grid, 0);
    for (std::size_t k = 0; k < f.grid.size(); ++k) {
      const bool sing = mask[k].get<int>() != 0 || omega[k].is_null();
      f.singular.data[k] = sing ? 1 : 0;
      if (!sing) {
        f.omega.data[k] = omega[k].get<double>();
        f.sinh_omega.data[k] = std::sinh(f.omega.data[k]);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("malformed field file: ") + e.what());
  }
  if (j.contains("config") && f.provenance != Provenance::Relaxation) {
    const FieldRequest req = field_request_from(j.at("config"));
    if (req.grid == f.grid && req.point.c0 == f.c0) {
      const OmegaField rebuilt = build_field(req);
      f.source = rebuilt.source;
    }
  }
  return f;
}

inline OmegaField read_field(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("field file is not JSON: ") + e.what());
  }
  return read_field(j);
}

inline json to_json(const HolonomyReport& r) {
  json out = {{"type", r.type},
              {"angle_or_length", r.angle_or_length},
              {"residual", r.residual},
              {"closed", r.closed}};
  if (r.fixed_point) out["fixed_point"] = {r.fixed_point->real(), r.fixed_point->imag()};
  return out;
}

/// OBJ: `v` carries chart coordinates (u1, u2, t); the ambient point of each
/// vertex follows as a `# va` comment (model coordinates then t). Quads are
/// `f` records, constant-y foliation curves `l` records.
inline void write_obj(std::ostream& os, const SurfaceMesh& m) {
  auto num = [](double v) { return json(v).dump(); };
  os << "# foliata " << kVersion << '\n';
  os << "# chart " << to_string(m.space.kind) << " c0 " << num(m.space.c0) << '\n';
  if (m.params)
    os << "# params c0 " << num(m.params->c0) << " c " << num(m.params->c) << " d "
       << num(m.params->d) << " a " << num(m.params->a) << '\n';
  os << "# grid " << num(m.grid.x0) << ' ' << num(m.grid.x1) << ' ' << num(m.grid.y0) << ' '
     << num(m.grid.y1) << ' ' << m.grid.nx << ' ' << m.grid.ny << '\n';
  const char* model = m.space.kind == ChartKind::PoincareDisk   ? "hyperboloid X0 X1 X2 t"
                      : m.space.kind == ChartKind::Stereographic ? "sphere p1 p2 p3 t"
                                                                  : "plane u1 u2 t";
  os << "# va " << model << '\n';
  for (const auto& v : m.vertices) {
    os << "v " << num(v.chart[0]) << ' ' << num(v.chart[1]) << ' ' << num(v.chart[2]) << '\n';
    os << "# va";
    if (m.space.kind == ChartKind::EuclideanPlane) {
      os << ' ' << num(v.chart[0]) << ' ' << num(v.chart[1]);
    } else {
      for (double c : v.model) os << ' ' << num(c);
    }
    os << ' ' << num(v.chart[2]) << '\n';
  }
  for (const auto& f : m.faces)
    os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << ' ' << f[3] + 1 << '\n';
  for (const auto& line : m.foliation) {
    os << 'l';
    for (std::size_t v : line) os << ' ' << v + 1;
    os << '\n';
  }
}

}  // namespace foliata::io
