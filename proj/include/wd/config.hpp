#pragma once

// Run configuration: a flat "key = value" text format with # comments and
// [section] headers, command-line overrides, and model construction by name.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wd/errors.hpp"
#include "wd/model.hpp"
#include "wd/transport.hpp"
#include "wd/wannier.hpp"

namespace wd {

struct RunConfig {
  std::string model = "haldane";
  std::map<std::string, std::string> params;  ///< model parameters, parsed per model
  int mesh_n = 64;
  std::vector<int> l_list{8, 16, 32};
  std::vector<double> s_grid = default_s_grid();
  std::map<std::string, double> tolerances{{"gap", kDefaultGapTolerance},
                                           {"unitary", 1e-9},
                                           {"periodic", 1e-7},
                                           {"float_mesh", 96},
                                           {"steps_per_unit", 256}};
  std::vector<int> hs_meshes;  ///< extra mesh sizes for the frame H^s table
  std::string output_dir;
  std::string format = "json";
  int truncate = 0;
  unsigned seed = 0;

  TransportConfig transport() const {
    TransportConfig t;
    t.steps_per_unit = static_cast<int>(tolerances.at("steps_per_unit"));
    t.tol_unitary = tolerances.at("unitary");
    t.tol_periodic = tolerances.at("periodic");
    return t;
  }
  double gap_tol() const { return tolerances.at("gap"); }
  int float_mesh() const { return static_cast<int>(tolerances.at("float_mesh")); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(x))
    fail(ErrorCode::ConfigError, "value of '" + key + "' is not a number: '" + v + "'");
  return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) fail(ErrorCode::ConfigError, "value of '" + key + "' is not an integer");
  return static_cast<int>(x);
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(key, item));
  if (out.empty()) fail(ErrorCode::ConfigError, "'" + key + "' needs at least one value");
  return out;
}

}  // namespace detail

/// Applies one "section.key = value" setting. Top-level keys have no section prefix.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v = trim(value);
  if (key == "model") {
    cfg.model = v;
  } else if (key == "mesh") {
    cfg.mesh_n = parse_int(key, v);
  } else if (key == "out") {
    cfg.output_dir = v;
  } else if (key == "format") {
    cfg.format = v;
  } else if (key == "truncate") {
    cfg.truncate = parse_int(key, v);
  } else if (key == "seed") {
    cfg.seed = static_cast<unsigned>(parse_int(key, v));
  } else if (key.rfind("params.", 0) == 0) {
    cfg.params[key.substr(7)] = v;
  } else if (key == "wannier.L") {
    cfg.l_list = parse_list<int>(key, v, parse_int);
  } else if (key == "wannier.s_grid") {
    cfg.s_grid = parse_list<double>(key, v, parse_real);
  } else if (key == "frame.hs_meshes") {
    cfg.hs_meshes = parse_list<int>(key, v, parse_int);
  } else if (key.rfind("tolerances.", 0) == 0 && cfg.tolerances.count(key.substr(11))) {
    cfg.tolerances[key.substr(11)] = parse_real(key, v);
  } else {
    fail(ErrorCode::ConfigError, "unknown configuration key '" + key + "'");
  }
}

inline RunConfig parse_config(std::istream& in, const std::string& origin = "config") {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::ConfigError, where + ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ConfigError, where + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    try {
      apply_setting(cfg, section.empty() ? key : section + "." + key, line.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, where + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open config file " + path);
  return parse_config(in, path);
}

/// Checks the configuration; the supercell list only matters for dichotomy runs.
inline void validate(const RunConfig& cfg, bool supercells = false) {
  if (cfg.mesh_n < 2 || cfg.mesh_n % 2 != 0) fail(ErrorCode::ConfigError, "mesh must be even and >= 2");
  if (supercells)
    for (int l : cfg.l_list)
      if (l < 1 || 2 * l > cfg.mesh_n)
        fail(ErrorCode::ConfigError, "supercell L = " + std::to_string(l) + " must satisfy 1 <= L <= mesh/2");
  for (int n : cfg.hs_meshes)
    if (n < 2 || n % 2 != 0) fail(ErrorCode::ConfigError, "hs_meshes entries must be even and >= 2");
  for (const auto& [k, v] : cfg.tolerances)
    if (!(v > 0.0)) fail(ErrorCode::ConfigError, "tolerance '" + k + "' must be positive");
  if (cfg.float_mesh() % 2 != 0) fail(ErrorCode::ConfigError, "float_mesh must be even");
  if (cfg.format != "json" && cfg.format != "csv") fail(ErrorCode::ConfigError, "format must be json or csv");
  if (cfg.truncate < 0) fail(ErrorCode::ConfigError, "truncate must be nonnegative");
}

/// Builds the model named in the configuration. Unknown parameter names are rejected.
inline BlochModel build_model(const RunConfig& cfg) {
  std::set<std::string> used;
  auto real = [&](const std::string& key, double fallback) {
    used.insert(key);
    auto it = cfg.params.find(key);
    return it == cfg.params.end() ? fallback : detail::parse_real(key, it->second);
  };
  auto integer = [&](const std::string& key, int fallback) {
    used.insert(key);
    auto it = cfg.params.find(key);
    return it == cfg.params.end() ? fallback : detail::parse_int(key, it->second);
  };
  auto finish = [&](BlochModel m) {
    for (const auto& [k, v] : cfg.params)
      if (!used.count(k)) fail(ErrorCode::ConfigError, "unknown parameter '" + k + "' for model " + cfg.model);
    return m;
  };
  try {
    if (cfg.model == "haldane")
      return finish(build_haldane(real("t1", 1.0), real("t2", 0.1), real("phi", kPi / 2), real("M", 0.0)));
    if (cfg.model == "hofstadter") {
      const int p = integer("p", 1), q = integer("q", 3);
      return finish(build_hofstadter(p, q, {integer("band", 0), integer("bands", 1)}));
    }
    if (cfg.model == "coupled4") return finish(build_coupled4(real("eps02", 0.3), real("eps13", 0.1)));
    if (cfg.model == "haldane4")
      return finish(build_haldane4(real("t1", 1.0), real("t2", 0.1), real("phi", kPi / 2), real("M", 0.0),
                                   real("theta", 0.3)));
    if (cfg.model == "constant") {
      used.insert("energies");
      auto it = cfg.params.find("energies");
      const auto e = detail::parse_list<double>("energies", it == cfg.params.end() ? "-1,1" : it->second,
                                                detail::parse_real);
      return finish(build_constant(e, {integer("band", 0), integer("bands", 1)}));
    }
    if (cfg.model == "matrixfile") {
      used.insert("file");
      auto it = cfg.params.find("file");
      if (it == cfg.params.end()) fail(ErrorCode::ConfigError, "matrixfile model needs params.file");
      const BandWindow w{integer("band", 0), integer("bands", 1)};
      return finish(load_hopping_file(it->second, w));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::ConfigError, e.what());
    throw;
  }
  fail(ErrorCode::ConfigError, "unknown model '" + cfg.model + "'");
}

}  // namespace wd
