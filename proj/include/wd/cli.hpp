#pragma once

// Subcommands of the command-line tool. Each writes one JSON document to `out`, data
// files to cfg.output_dir when set, and returns the process exit status:
// 0 success, 1 configuration error, 2 gap or topology error, 3 numerical certificate failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wd/config.hpp"
#include "wd/errors.hpp"
#include "wd/frames.hpp"
#include "wd/galerkin.hpp"
#include "wd/model.hpp"
#include "wd/topology.hpp"
#include "wd/wannier.hpp"

namespace wd::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
    case ErrorCode::OddMeshSize:
    case ErrorCode::NonCoprimeFlux:
    case ErrorCode::SupercellTooSmall:
      return 1;
    case ErrorCode::GapClosure:
    case ErrorCode::TopologicalObstruction:
    case ErrorCode::BranchDegenerate:
    case ErrorCode::NonCommutingGenerators:
    case ErrorCode::CovarianceMismatch:
      return 2;
    default:
      return 3;
  }
}

/// Rounds to 12 significant digits so that the emitted text is stable.
inline double r12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline Json reals(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(r12(x));
  return a;
}

inline Json kpoint(KPoint k) { return Json::array({r12(k.k1), r12(k.k2)}); }

inline Json header(const std::string& command, const BlochModel& model, int n) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  j["model"] = model.name();
  Json p = Json::object();
  for (const auto& [k, v] : model.params()) p[k] = r12(v);
  j["params"] = p;
  j["N"] = n;
  return j;
}

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.output_dir);
  return std::filesystem::path(cfg.output_dir) / file;
}

inline void write_text(const RunConfig& cfg, const std::string& file, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(output_path(cfg, file));
  if (!f) fail(ErrorCode::ConfigError, "cannot write " + output_path(cfg, file).string());
  body(f);
}

inline void emit(const RunConfig& cfg, const std::string& command, const Json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!cfg.output_dir.empty()) write_text(cfg, command + ".json", [&](std::ostream& f) { f << text; });
}

inline void write_frame_csv(std::ostream& os, const Frame& frame) {
  os << "k1,k2,band,orbital,re,im,singular\n";
  char buf[160];
  for (std::size_t idx = 0; idx < frame.mesh.size(); ++idx) {
    const KPoint k = frame.mesh.point(idx);
    for (int a = 0; a < frame.rank; ++a)
      for (int o = 0; o < frame.dim; ++o) {
        const cplx v = frame[idx](o, a);
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%d,%d,%.12g,%.12g,%d\n", k.k1, k.k2, a, o, v.real(), v.imag(),
                      frame.defined(idx) ? 0 : 1);
        os << buf;
      }
  }
}

struct Context {
  BlochModel model;
  ProjectorFamily family;
  GapReport gap;
};

inline Context prepare(const RunConfig& cfg) {
  validate(cfg);
  BlochModel model = build_model(cfg);
  const GapReport gap = certify_gap(model, cfg.mesh_n, cfg.gap_tol());
  ProjectorFamily family = projector_family(model, cfg.gap_tol());
  family.set_gap_floor(gap.certified_floor);
  return {std::move(model), std::move(family), gap};
}

inline Json gap_json(const GapReport& g) {
  return Json{{"min_gap", r12(g.min_gap)},
              {"argmin_k", kpoint(g.argmin_k)},
              {"mesh", g.mesh_size},
              {"certified_floor", r12(g.certified_floor)}};
}

inline int cmd_gap(const RunConfig& cfg, std::ostream& out) {
  const Context ctx = prepare(cfg);
  Json j = header("gap", ctx.model, cfg.mesh_n);
  j["gap"] = gap_json(ctx.gap);
  emit(cfg, "gap", j, out);
  return 0;
}

inline int cmd_chern(const RunConfig& cfg, std::ostream& out) {
  const Context ctx = prepare(cfg);
  const KMesh mesh(cfg.mesh_n), fmesh(cfg.float_mesh());
  const LinkChern link = chern_fhs_detail(ctx.family, mesh);
  const CurvatureField omega = berry_curvature(ctx.family, fmesh);
  const double cf = omega.integral() / kTwoPi;
  Json j = header("chern", ctx.model, cfg.mesh_n);
  j["float_N"] = cfg.float_mesh();
  j["chern_int"] = link.value;
  j["chern_float"] = r12(cf);
  j["discrepancy"] = r12(std::abs(cf - link.value));
  j["max_plaquette_phase"] = r12(link.max_plaquette);
  j["gap"] = gap_json(ctx.gap);
  if (!cfg.output_dir.empty() && cfg.format == "csv")
    write_text(cfg, "curvature.csv", [&](std::ostream& f) { write_curvature_csv(f, omega); });
  emit(cfg, "chern", j, out);
  return 0;
}

inline Json hs_row(double s, int n, const HsReport& h) {
  return Json{{"s", r12(s)}, {"N", n}, {"norm", r12(h.norm)}, {"seminorm", r12(h.seminorm)}};
}

inline int cmd_frame(const RunConfig& cfg, std::ostream& out) {
  const Context ctx = prepare(cfg);
  const TransportConfig tc = cfg.transport();
  const KMesh mesh(cfg.mesh_n);
  const int c = chern_fhs(ctx.family, mesh);
  const SkeletonFrame sk = skeleton_frame(ctx.family, mesh, tc);
  const Frame frame = c == 0 ? column_gauge_frame(ctx.family, mesh, tc) : radial_extension(ctx.family, sk, mesh, tc);
  const FrameDefects def = frame_defects(frame, ctx.family);
  const GradientBoundReport grad = gradient_bound(frame);
  Json j = header("frame", ctx.model, cfg.mesh_n);
  j["chern_int"] = c;
  j["frame_kind"] = c == 0 ? "column_gauge" : "radial";
  j["vertex_residual"] = r12(sk.vertex_residual);
  j["edge_residual"] = r12(sk.edge_residual);
  j["orthonormality"] = r12(def.orthonormality);
  j["subordination"] = r12(def.subordination);
  Json sing = Json::array();
  for (KPoint k : frame.singular_points) sing.push_back(kpoint(k));
  j["singular_points"] = sing;
  j["gradient"] = Json{{"sup_weighted", r12(grad.sup_weighted)}, {"sup_unweighted", r12(grad.sup_unweighted)}};
  Json hs = Json::array();
  std::vector<int> meshes{cfg.mesh_n};
  for (int n : cfg.hs_meshes)
    if (n != cfg.mesh_n) meshes.push_back(n);
  for (int n : meshes) {
    const KMesh m(n);
    const Frame f = n == cfg.mesh_n ? frame : c == 0 ? column_gauge_frame(ctx.family, m, tc)
                                                     : radial_extension(ctx.family, skeleton_frame(ctx.family, m, tc), m, tc);
    const WannierSet coeffs = synthesize(f, n / 2);
    for (double s : cfg.s_grid) hs.push_back(hs_row(s, n, hs_norm(coeffs, s)));
  }
  j["hs_table"] = hs;
  if (!cfg.output_dir.empty() && cfg.format == "csv")
    write_text(cfg, "frame.csv", [&](std::ostream& f) { write_frame_csv(f, frame); });
  emit(cfg, "frame", j, out);
  return 0;
}

inline Json exp_json(const std::optional<ExpFit>& fit) {
  if (!fit) return nullptr;
  return Json{{"beta", r12(fit->beta)}, {"r2", r12(fit->r2)}, {"shells", fit->shells}};
}

inline int cmd_wannier(const RunConfig& cfg, std::ostream& out) {
  const Context ctx = prepare(cfg);
  const TransportConfig tc = cfg.transport();
  const KMesh mesh(cfg.mesh_n);
  const int c = chern_fhs(ctx.family, mesh);
  const WannierSet w = synthesize(dichotomy_frame(ctx.family, mesh, c, tc), cfg.mesh_n / 2);
  const MomentReport mom = moments(w, cfg.s_grid, ctx.model.a1(), ctx.model.a2());
  Json j = header("wannier", ctx.model, cfg.mesh_n);
  j["L"] = w.L;
  j["chern_int"] = c;
  j["s_grid"] = reals(cfg.s_grid);
  Json bands = Json::array();
  for (int a = 0; a < w.rank; ++a) {
    std::optional<ExpFit> fit;
    try {
      fit = exp_fit_profile(shell_profile(w, a, ctx.model.a1(), ctx.model.a2()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientSupport) throw;
    }
    bands.push_back(Json{{"mass", r12(w.mass(a))},
                         {"center", Json::array({r12(mom.center[a].x()), r12(mom.center[a].y())})},
                         {"second_moment", r12(mom.second_moment[a])},
                         {"moments", reals(mom.moments[a])},
                         {"exp_fit", exp_json(fit)}});
  }
  j["bands"] = bands;
  j["mv_spread"] = r12(mom.mv_spread);
  j["parseval_deficit_bound"] = r12(w.parseval_deficit_bound());
  if (!cfg.output_dir.empty() && cfg.format == "csv")
    write_text(cfg, "wannier.csv", [&](std::ostream& f) { write_wannier_csv(f, w); });
  emit(cfg, "wannier", j, out);
  return 0;
}

inline Json truncation_json(const TruncationReport& r) {
  return Json{{"n", r.n},
              {"min_injectivity", r12(r.min_injectivity)},
              {"argmin_k", kpoint(r.argmin_k)},
              {"certified", r.certified},
              {"chern_input", r.chern_input},
              {"chern_truncated", r.chern_truncated},
              {"chern_preserved", r.chern_preserved},
              {"projector_h1_distance", r12(r.projector_h1_distance)}};
}

inline int cmd_dichotomy(const RunConfig& cfg, std::ostream& out) {
  validate(cfg, true);
  const BlochModel model = build_model(cfg);
  DichotomyOptions opt;
  opt.s_grid = cfg.s_grid;
  opt.transport = cfg.transport();
  opt.gap_tol = cfg.gap_tol();
  const DichotomyReport rep = dichotomy_report(model, cfg.mesh_n, cfg.l_list, opt);
  Json j = header("dichotomy", model, cfg.mesh_n);
  j["gap_floor"] = r12(rep.gap_floor);
  j["chern_int"] = rep.chern_int;
  j["chern_float"] = r12(rep.chern_float);
  j["frame_kind"] = rep.frame_kind;
  Json rows = Json::array();
  for (const auto& r : rep.per_L) rows.push_back(Json{{"L", r.L}, {"N", r.mesh_n}, {"X2", reals(r.x2)}, {"F_MV", r12(r.f_mv)}});
  j["per_L"] = rows;
  Json hs = Json::array();
  for (const auto& h : rep.hs_table)
    hs.push_back(Json{{"s", r12(h.s)}, {"N", h.mesh_n}, {"norm", r12(h.norm)}, {"seminorm", r12(h.seminorm)}});
  j["hs_table"] = hs;
  j["exp_fit"] = exp_json(rep.exp);
  j["compact_support"] = rep.compact_support;
  j["x2_log_fit"] = Json{{"slope", r12(rep.x2_log_slope)}, {"r2", r12(rep.x2_log_r2)}};
  j["x2_relative_change"] = r12(rep.x2_relative_change);
  if (cfg.truncate > 0) {
    const auto t = truncate_family(projector_family(model, cfg.gap_tol()), cfg.truncate, KMesh(cfg.mesh_n));
    j["truncation"] = truncation_json(t.report);
  }
  j["classification"] = to_string(rep.classification);
  if (!cfg.output_dir.empty() && cfg.format == "csv") {
    write_text(cfg, "dichotomy_per_L.csv", [&](std::ostream& f) {
      f << "L,N,band,X2,F_MV\n";
      char buf[128];
      for (const auto& r : rep.per_L)
        for (std::size_t a = 0; a < r.x2.size(); ++a) {
          std::snprintf(buf, sizeof buf, "%d,%d,%zu,%.12g,%.12g\n", r.L, r.mesh_n, a, r.x2[a], r.f_mv);
          f << buf;
        }
    });
    write_text(cfg, "dichotomy_hs.csv", [&](std::ostream& f) {
      f << "s,N,norm,seminorm\n";
      char buf[128];
      for (const auto& h : rep.hs_table) {
        std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g\n", h.s, h.mesh_n, h.norm, h.seminorm);
        f << buf;
      }
    });
  }
  emit(cfg, "dichotomy", j, out);
  return rep.classification == Classification::Inconclusive ? exit_code(ErrorCode::Inconclusive) : 0;
}

inline int cmd_galerkin(const RunConfig& cfg, std::ostream& out) {
  const Context ctx = prepare(cfg);
  const KMesh mesh(cfg.mesh_n);
  std::vector<int> dims;
  if (cfg.truncate > 0)
    dims.push_back(cfg.truncate);
  else
    for (int n = ctx.family.rank(); n <= ctx.family.dim(); ++n) dims.push_back(n);
  Json j = header("galerkin", ctx.model, cfg.mesh_n);
  Json rows = Json::array();
  int status = 0;
  for (int n : dims) {
    try {
      rows.push_back(truncation_json(truncate_family(ctx.family, n, mesh).report));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TruncationNotInjective) throw;
      rows.push_back(Json{{"n", n}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}});
      if (cfg.truncate > 0) status = exit_code(e.code());
    }
  }
  j["truncations"] = rows;
  emit(cfg, "galerkin", j, out);
  return status;
}

inline const std::map<std::string, std::function<int(const RunConfig&, std::ostream&)>>& commands() {
  static const std::map<std::string, std::function<int(const RunConfig&, std::ostream&)>> table{
      {"chern", cmd_chern}, {"frame", cmd_frame},         {"wannier", cmd_wannier},
      {"dichotomy", cmd_dichotomy}, {"galerkin", cmd_galerkin}, {"gap", cmd_gap}};
  return table;
}

/// Runs a subcommand; library errors become an error document on `out`, a message on
/// `err` and the mapped exit status.
inline int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto it = commands().find(command);
  if (it == commands().end()) {
    err << "unknown command '" << command << "'\n";
    return 1;
  }
  try {
    return it->second(cfg, out);
  } catch (const Error& e) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["command"] = command;
    j["error"] = Json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    out << j.dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wd::cli
