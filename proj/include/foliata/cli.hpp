#pragma once

#include <array>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "foliata/build.hpp"
#include "foliata/error.hpp"
#include "foliata/immersion.hpp"
#include "foliata/io.hpp"
#include "foliata/moduli.hpp"
#include "foliata/profile.hpp"
#include "foliata/shiffman.hpp"

// Command-line front end. Exit codes: 0 success, 1 domain error (including a
// point outside the moduli), 2 usage error. Data goes to --out or `out`,
// diagnostics to `err`.

namespace foliata::cli {

using io::json;

namespace detail {

struct PointArgs {
  double c0 = -1.0, c = 0.0, d = 0.0, a = 0.0;

  void attach(CLI::App* app, bool required = true) {
    auto* o0 = app->add_option("--c0", c0, "ambient curvature");
    auto* oc = app->add_option("--c", c, "first-integral constant of f");
    auto* od = app->add_option("--d", d, "first-integral constant of g");
    if (required) {
      o0->required();
      oc->required();
      od->required();
    }
    app->add_option("--a", a, "separation constant (read only when c0 = 0)");
  }
  ModuliPoint point() const { return {c0, c, d, a}; }
};

struct FieldArgs {
  PointArgs point;
  std::vector<double> domain{0.0, 1.0, 0.0, 1.0};
  std::size_t nx = 101, ny = 101;
  std::string mode = "auto";
  bool trivial_f = false, trivial_g = false;
  double profile_step = 0.0, tolerance = 1e-9, bump = 0.1;
  std::string field_file;

  void attach(CLI::App* app, bool allow_file) {
    point.attach(app, !allow_file);
    app->add_option("--domain", domain, "x0 x1 y0 y1")->expected(4);
    app->add_option("--nx", nx, "nodes along x")->check(CLI::Range(5, 100000));
    app->add_option("--ny", ny, "nodes along y")->check(CLI::Range(5, 100000));
    app->add_option("--mode", mode, "auto | reconstruct | degenerate | relax")
        ->check(CLI::IsMember({"auto", "reconstruct", "degenerate", "relax"}));
    app->add_flag("--trivial-f", trivial_f, "use the constant branch f = 0");
    app->add_flag("--trivial-g", trivial_g, "use the constant branch g = 0");
    app->add_option("--profile-step", profile_step, "profile RK4 step (0 = min(1e-3, h/4))");
    app->add_option("--tolerance", tolerance, "first-integral drift budget");
    app->add_option("--bump", bump, "relax mode: edge bump amplitude on y = y0");
    if (allow_file) app->add_option("--field", field_file, "read the field from this file instead");
  }

  FieldRequest request() const {
    FieldRequest r;
    r.point = point.point();
    r.grid = {domain[0], domain[1], domain[2], domain[3], nx, ny};
    r.mode = io::field_mode_from(mode);
    r.trivial_f = trivial_f;
    r.trivial_g = trivial_g;
    r.profile_step = profile_step;
    r.tolerance = tolerance;
    r.bump = bump;
    return r;
  }
};

struct Loaded {
  OmegaField field;
  std::optional<FieldRequest> request;
  json config;
};

inline Loaded load_field(const FieldArgs& args) {
  if (!args.field_file.empty()) {
    std::ifstream in(args.field_file);
    if (!in) throw Error(ErrorCode::InvalidParams, "cannot open " + args.field_file);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidParams, std::string("field file is not JSON: ") + e.what());
    }
    Loaded l{io::read_field(j), std::nullopt, {{"field", args.field_file}}};
    if (j.contains("config")) {
      l.request = io::field_request_from(j.at("config"));
      l.config["field_config"] = io::to_json(*l.request);
    }
    return l;
  }
  const FieldRequest req = args.request();
  return {build_field(req), req, io::to_json(req)};
}

struct Output {
  std::string path;
  std::ostream& fallback;

  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      fallback << text;
      return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::InvalidParams, "cannot write " + path);
    os << text;
  }
};

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct SeedArgs {
  std::vector<double> seed;
  double psi0 = 0.0;
  std::size_t substeps = 1;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "seed node position x y (default: axis node)")->expected(2);
    app->add_option("--psi0", psi0, "frame angle at the seed");
    app->add_option("--substeps", substeps, "RK4 steps per grid cell")->check(CLI::Range(1, 1000));
  }

  FrameSeed resolve(const OmegaField& f) const {
    FrameSeed s = default_seed(f);
    if (seed.size() == 2) {
      s.x = seed[0];
      s.y = seed[1];
    }
    s.psi0 = psi0;
    return s;
  }

  json to_json(const FrameSeed& s) const {
    return {{"seed", {s.x, s.y}}, {"psi0", s.psi0}, {"substeps", substeps}};
  }
};

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimal surfaces foliated by constant-curvature horizontal curves"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kVersion);
  std::string out_path;

  // classify
  auto* classify = app.add_subcommand("classify", "label a parameter point");
  detail::PointArgs cls;
  cls.attach(classify);
  classify->add_option("--out", out_path, "output file");

  // scan
  auto* scan = app.add_subcommand("scan", "label a rectangle of the (c, d) plane");
  double scan_c0 = -1.0, scan_a = 0.0;
  std::vector<double> c_range{-2.0, 2.0}, d_range{-2.0, 2.0};
  std::size_t scan_nx = 64, scan_ny = 64;
  scan->add_option("--c0", scan_c0, "ambient curvature")->required();
  scan->add_option("--c-range", c_range, "cmin cmax")->expected(2);
  scan->add_option("--d-range", d_range, "dmin dmax")->expected(2);
  scan->add_option("--nx", scan_nx, "cells along c")->check(CLI::Range(2, 100000));
  scan->add_option("--ny", scan_ny, "cells along d")->check(CLI::Range(2, 100000));
  scan->add_option("--a", scan_a, "separation constant for c0 = 0");
  scan->add_option("--out", out_path, "CSV output file");

  // profile
  auto* profile = app.add_subcommand("profile", "integrate f or g");
  detail::PointArgs pro;
  pro.attach(profile);
  std::string kind = "f", sidecar;
  std::vector<double> range{0.0, 10.0};
  double step = 1e-3, phase = 0.0, tolerance = 1e-9;
  bool trivial_f = false, trivial_g = false;
  profile->add_option("--kind", kind, "f or g")->check(CLI::IsMember({"f", "g"}));
  profile->add_option("--range", range, "start end")->expected(2);
  profile->add_option("--step", step, "RK4 step")->check(CLI::PositiveNumber);
  profile->add_option("--phase", phase, "sample q(x + phase) of the canonical solution");
  profile->add_option("--tolerance", tolerance, "first-integral drift budget");
  profile->add_flag("--trivial-f", trivial_f, "constant branch f = 0");
  profile->add_flag("--trivial-g", trivial_g, "constant branch g = 0");
  profile->add_option("--out", out_path, "CSV output file");
  profile->add_option("--sidecar", sidecar, "JSON sidecar (default: <out>.json)");

  // field
  auto* field = app.add_subcommand("field", "sample omega on a grid and write a field file");
  detail::FieldArgs fa;
  fa.attach(field, false);
  field->add_option("--out", out_path, "field file");

  // verify
  auto* verify = app.add_subcommand("verify", "residuals of a field");
  detail::FieldArgs va;
  va.attach(verify, true);
  detail::SeedArgs vs;
  vs.attach(verify);
  bool want_shiffman = false, want_immersion = false;
  double margin = 0.0, period_override = 0.0;
  verify->add_flag("--shiffman", want_shiffman, "Shiffman field, Jacobi identity, curvature checks");
  verify->add_flag("--immersion", want_immersion, "frame integration diagnostics");
  verify->add_option("--margin", margin, "Shiffman checks: skip nodes this close to the edge");
  verify->add_option("--period", period_override, "holonomy shift (default: profile period)");
  verify->add_option("--out", out_path, "JSON output file");

  // mesh
  auto* mesh = app.add_subcommand("mesh", "integrate the immersion and write an OBJ mesh");
  detail::FieldArgs ma;
  ma.attach(mesh, true);
  detail::SeedArgs ms;
  ms.attach(mesh);
  bool weierstrass = false;
  mesh->add_flag("--weierstrass", weierstrass, "flat case: use the Weierstrass route");
  mesh->add_option("--out", out_path, "OBJ output file");

  // holonomy
  auto* hol = app.add_subcommand("holonomy", "isometry relating the frame one period apart");
  detail::FieldArgs ha;
  ha.attach(hol, true);
  detail::SeedArgs hs;
  hs.attach(hol);
  double hol_period = 0.0;
  hol->add_option("--period", hol_period, "shift along x (default: profile period)");
  hol->add_option("--out", out_path, "JSON output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << io::kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  const detail::Output output{out_path, out};
  try {
    if (classify->parsed()) {
      const ModuliPoint p = cls.point();
      const RegionReport r = foliata::classify(p);
      json j = io::classify_json(p, r);
      j["config"] = {{"subcommand", "classify"}, {"c0", p.c0}, {"c", p.c}, {"d", p.d}, {"a", p.a}};
      j["version"] = io::kVersion;
      output.write(detail::dump(j));
      if (r.label == Region::OutsideModuli) {
        err << "point lies outside the moduli space\n";
        return 1;
      }
      return 0;
    }

    if (scan->parsed()) {
      const auto cells = moduli_scan(scan_c0, {c_range[0], c_range[1], d_range[0], d_range[1]},
                                     scan_nx, scan_ny, scan_a);
      std::ostringstream os;
      io::write_scan_csv(os, cells);
      output.write(os.str());
      return 0;
    }

    if (profile->parsed()) {
      const DerivedParams dp = derive_params(pro.point());
      const ProfileKind k = kind == "f" ? ProfileKind::F : ProfileKind::G;
      const bool trivial = k == ProfileKind::F ? trivial_f : trivial_g;
      const ProfileSolution sol =
          integrate_profile(dp, k, range[0], range[1], step, {tolerance, phase, trivial});
      std::ostringstream os;
      io::write_profile_csv(os, sol);
      output.write(os.str());
      std::string side = sidecar;
      if (side.empty() && !out_path.empty() && out_path != "-") side = out_path + ".json";
      if (!side.empty()) {
        json j = io::profile_sidecar(sol);
        j["config"] = {{"subcommand", "profile"}, {"c0", dp.c0},   {"c", dp.c},
                       {"d", dp.d},               {"a", dp.a},     {"kind", kind},
                       {"range", range},          {"step", step},  {"phase", phase},
                       {"tolerance", tolerance},  {"trivial", trivial}};
        j["version"] = io::kVersion;
        detail::Output{side, out}.write(detail::dump(j));
      }
      return 0;
    }

    if (field->parsed()) {
      const FieldRequest req = fa.request();
      const OmegaField f = build_field(req);
      json config = io::to_json(req);
      config["subcommand"] = "field";
      output.write(io::field_json(f, config).dump() + "\n");
      return 0;
    }

    if (verify->parsed()) {
      const detail::Loaded l = detail::load_field(va);
      json j;
      j["config"] = l.config;
      j["config"]["subcommand"] = "verify";
      j["config"]["margin"] = margin;
      j["sinh_gordon"] = io::to_json(sinh_gordon_residual(l.field));
      if (want_shiffman) {
        const JacobiReport r = jacobi_report(l.field, margin);
        j["max_u"] = r.max_u;
        j["jacobi_residual"] = io::to_json(r.residual);
        j["shiffman_consistency_linf"] = r.consistency_linf;
        j["potential_identity_linf"] = r.potential_identity_linf;
        j["gauss_dual_route_linf"] = r.gauss_dual_route_linf;
      }
      if (want_immersion) {
        const ChartSpace space = ChartSpace::for_curvature(l.field.c0);
        const FrameSeed seed = vs.resolve(l.field);
        j["config"].update(vs.to_json(seed));
        const FrameField fr = integrate_frame(l.field, space, seed, {vs.substeps, false, 0});
        const IsometryReport iso = isometry_check(fr, l.field);
        j["compat_linf"] = fr.compat_linf;
        j["isometry_linf"] = io::number_or_null(iso.isometry.linf);
        j["hopf_real_err"] = iso.hopf_real_err;
        j["hopf_imag_err"] = iso.hopf_imag_err;
        j["harmonic_linf"] = io::number_or_null(harmonic_residual(fr, l.field).linf);
        std::optional<double> period;
        if (period_override > 0.0) period = period_override;
        else if (l.request) period = holonomy_period(*l.request);
        j["holonomy"] = nullptr;
        if (period) {
          try {
            j["holonomy"] = io::to_json(holonomy(fr, l.field, *period));
            j["holonomy"]["period"] = *period;
          } catch (const Error& e) {
            err << "holonomy skipped: " << e.what() << '\n';
          }
        } else {
          err << "holonomy skipped: no period available\n";
        }
      }
      j["version"] = io::kVersion;
      output.write(detail::dump(j));
      return 0;
    }

    if (mesh->parsed()) {
      const detail::Loaded l = detail::load_field(ma);
      const ChartSpace space = ChartSpace::for_curvature(l.field.c0);
      const FrameSeed seed = ms.resolve(l.field);
      const FrameField fr = integrate_frame(l.field, space, seed, {ms.substeps, false, 0});
      SurfaceMesh m = weierstrass ? weierstrass_flat(l.field, fr) : build_mesh(fr, l.field);
      if (l.request) m.params = l.request->point;
      std::ostringstream os;
      io::write_obj(os, m);
      output.write(os.str());
      err << m.vertices.size() << " vertices, " << m.faces.size() << " quads, "
          << m.foliation.size() << " foliation curves\n";
      return 0;
    }

    if (hol->parsed()) {
      const detail::Loaded l = detail::load_field(ha);
      std::optional<double> period;
      if (hol_period > 0.0) period = hol_period;
      else if (l.request) period = holonomy_period(*l.request);
      if (!period) throw Error(ErrorCode::PeriodUnavailable, "no oscillating profile");
      const ChartSpace space = ChartSpace::for_curvature(l.field.c0);
      const FrameSeed seed = hs.resolve(l.field);
      const FrameField fr = integrate_frame(l.field, space, seed, {hs.substeps, false, 0});
      json j = io::to_json(holonomy(fr, l.field, *period));
      j["period"] = *period;
      j["config"] = l.config;
      j["config"]["subcommand"] = "holonomy";
      j["config"].update(hs.to_json(seed));
      j["version"] = io::kVersion;
      output.write(detail::dump(j));
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace foliata::cli
