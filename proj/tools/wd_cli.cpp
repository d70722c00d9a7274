// Command-line front end: wd_cli <chern|frame|wannier|dichotomy|galerkin|gap> [options]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wd/cli.hpp"
#include "wd/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bloch frames, Chern numbers and Wannier localization for tight-binding models"};
  app.require_subcommand(1, 1);
  std::string config_path, model, out_dir, format;
  std::vector<std::string> params;
  std::vector<int> supercells;
  std::optional<int> mesh, truncate;
  for (const auto& [name, fn] : wd::cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--model", model, "haldane | hofstadter | matrixfile | constant | coupled4 | haldane4");
    sub->add_option("--param", params, "model parameter key=value (repeatable)");
    sub->add_option("--mesh", mesh, "even mesh size N");
    sub->add_option("--L", supercells, "supercell sizes for the dichotomy run")->delimiter(',');
    sub->add_option("--out", out_dir, "directory for JSON and CSV output");
    sub->add_option("--format", format, "json | csv");
    sub->add_option("--truncate", truncate, "Galerkin truncation dimension");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  wd::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = wd::load_config(config_path);
    if (!model.empty()) cfg.model = model;
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) wd::fail(wd::ErrorCode::ConfigError, "--param expects key=value, got '" + p + "'");
      wd::apply_setting(cfg, "params." + wd::detail::trim(p.substr(0, eq)), p.substr(eq + 1));
    }
    if (mesh) cfg.mesh_n = *mesh;
    if (!supercells.empty()) cfg.l_list = supercells;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!format.empty()) cfg.format = format;
    if (truncate) cfg.truncate = *truncate;
  } catch (const wd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return wd::cli::run(command, cfg, std::cout, std::cerr);
}
