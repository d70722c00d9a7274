#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "wd/cli.hpp"

using namespace wd;
using wd::cli::Json;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test");
}

struct RunResult {
  int status;
  std::string out, err;
};

RunResult run(const std::string& command, const RunConfig& cfg) {
  std::ostringstream out, err;
  const int status = cli::run(command, cfg, out, err);
  return {status, out.str(), err.str()};
}

RunConfig small(const std::string& model, int mesh) {
  RunConfig cfg;
  cfg.model = model;
  cfg.mesh_n = mesh;
  return cfg;
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.model, "haldane");
  EXPECT_EQ(cfg.mesh_n, 64);
  EXPECT_EQ(cfg.l_list, (std::vector<int>{8, 16, 32}));
  EXPECT_EQ(cfg.s_grid, default_s_grid());
  EXPECT_EQ(cfg.gap_tol(), kDefaultGapTolerance);
  EXPECT_EQ(cfg.float_mesh(), 96);
}

TEST(Config, SectionsCommentsAndLists) {
  const RunConfig cfg = parse(
      "# run\nmodel = hofstadter\nmesh = 24   # even\n\n[params]\np = 2\nq = 5\n"
      "[wannier]\nL = 4, 8\ns_grid = 0.5,1\n[tolerances]\ngap = 1e-6\n[frame]\nhs_meshes = 16,32\n");
  EXPECT_EQ(cfg.model, "hofstadter");
  EXPECT_EQ(cfg.mesh_n, 24);
  EXPECT_EQ(cfg.params.at("p"), "2");
  EXPECT_EQ(cfg.l_list, (std::vector<int>{4, 8}));
  EXPECT_EQ(cfg.s_grid, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(cfg.gap_tol(), 1e-6);
  EXPECT_EQ(cfg.hs_meshes, (std::vector<int>{16, 32}));
  EXPECT_EQ(build_model(cfg).name(), "hofstadter");
}

TEST(Config, Errors) {
  EXPECT_WD_ERROR(parse("colour = red\n"), ErrorCode::ConfigError);
  EXPECT_WD_ERROR(parse("mesh = sixty\n"), ErrorCode::ConfigError);
  EXPECT_WD_ERROR(parse("mesh = 6.5\n"), ErrorCode::ConfigError);
  EXPECT_WD_ERROR(parse("[params\n"), ErrorCode::ConfigError);
  EXPECT_WD_ERROR(parse("just words\n"), ErrorCode::ConfigError);
  EXPECT_WD_ERROR(parse("[tolerances]\nfuzz = 1\n"), ErrorCode::ConfigError);
  EXPECT_WD_ERROR(load_config("/nonexistent/run.cfg"), ErrorCode::ConfigError);
  try {
    parse("model = haldane\n\nmesh = x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("test:3"), std::string::npos) << e.what();
  }
}

TEST(Config, Validation) {
  RunConfig cfg;
  cfg.mesh_n = 15;
  EXPECT_WD_ERROR(validate(cfg), ErrorCode::ConfigError);
  cfg.mesh_n = 16;
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_WD_ERROR(validate(cfg, true), ErrorCode::ConfigError);  // L = 32 > 16 / 2
  cfg.format = "xml";
  EXPECT_WD_ERROR(validate(cfg), ErrorCode::ConfigError);
}

TEST(Config, ModelConstruction) {
  RunConfig cfg;
  cfg.params["M"] = "1.0";
  EXPECT_EQ(build_model(cfg).params().at("M"), 1.0);
  cfg.params["mass"] = "2";
  EXPECT_WD_ERROR(build_model(cfg), ErrorCode::ConfigError);
  EXPECT_WD_ERROR(build_model(small("graphene", 16)), ErrorCode::ConfigError);
  RunConfig hof = small("hofstadter", 16);
  hof.params["p"] = "2";
  hof.params["q"] = "4";
  EXPECT_WD_ERROR(build_model(hof), ErrorCode::NonCoprimeFlux);
  EXPECT_EQ(run("gap", hof).status, 1);
  RunConfig file = small("matrixfile", 16);
  EXPECT_WD_ERROR(build_model(file), ErrorCode::ConfigError);
  file.params["file"] = std::string(WD_TEST_DATA) + "/qwz.txt";
  EXPECT_EQ(build_model(file).dim(), 2);
}

TEST(Cli, ExitCodeMapping) {
  EXPECT_EQ(cli::exit_code(ErrorCode::ConfigError), 1);
  EXPECT_EQ(cli::exit_code(ErrorCode::OddMeshSize), 1);
  EXPECT_EQ(cli::exit_code(ErrorCode::GapClosure), 2);
  EXPECT_EQ(cli::exit_code(ErrorCode::TopologicalObstruction), 2);
  EXPECT_EQ(cli::exit_code(ErrorCode::TruncationNotInjective), 3);
  EXPECT_EQ(cli::exit_code(ErrorCode::PlaquetteTooCoarse), 3);
}

TEST(Cli, RoundingToTwelveDigits) {
  EXPECT_EQ(cli::r12(0.1 + 0.2), 0.3);
  EXPECT_EQ(cli::r12(-1.0), -1.0);
  EXPECT_EQ(cli::r12(1.23456789012345e-7), 1.23456789012e-7);
}

TEST(Cli, ChernDocument) {
  RunConfig cfg = small("haldane", 16);
  cfg.tolerances["float_mesh"] = 48;
  const RunResult r = run("chern", cfg);
  ASSERT_EQ(r.status, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["command"], "chern");
  EXPECT_EQ(j["model"], "haldane");
  EXPECT_EQ(j["N"], 16);
  EXPECT_EQ(j["chern_int"], -1);
  EXPECT_NEAR(j["chern_float"].get<double>(), -1.0, 2e-2);
  EXPECT_TRUE(j.contains("gap"));
}

TEST(Cli, GapClosureExitsTwo) {
  RunConfig cfg = small("haldane", 24);
  cfg.params["t2"] = "0";
  const RunResult r = run("chern", cfg);
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(Json::parse(r.out)["error"]["code"], "GapClosure");
}

TEST(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run("gap", small("haldane", 7)).status, 1);
  EXPECT_EQ(run("bogus", small("haldane", 8)).status, 1);
  RunConfig cfg = small("haldane", 16);
  EXPECT_EQ(run("dichotomy", cfg).status, 1);  // default L list needs mesh >= 64
}

TEST(Cli, GalerkinSweepAndHardFailure) {
  const RunResult sweep = run("galerkin", small("coupled4", 16));
  ASSERT_EQ(sweep.status, 0) << sweep.err;
  const Json j = Json::parse(sweep.out);
  ASSERT_EQ(j["truncations"].size(), 3u);
  EXPECT_GT(j["truncations"][0]["projector_h1_distance"].get<double>(),
            j["truncations"][1]["projector_h1_distance"].get<double>());
  RunConfig bad = small("haldane4", 24);
  bad.truncate = 2;
  EXPECT_EQ(run("galerkin", bad).status, 3);
}

TEST(Cli, FrameAndWannierDocuments) {
  const RunResult f = run("frame", small("constant", 8));
  ASSERT_EQ(f.status, 0) << f.err;
  const Json jf = Json::parse(f.out);
  EXPECT_EQ(jf["vertex_residual"], 0.0);
  EXPECT_EQ(jf["edge_residual"], 0.0);
  RunConfig cfg = small("haldane", 16);
  cfg.params["M"] = "1";
  const RunResult w = run("wannier", cfg);
  ASSERT_EQ(w.status, 0) << w.err;
  const Json jw = Json::parse(w.out);
  EXPECT_NEAR(jw["bands"][0]["mass"].get<double>(), 1.0, 1e-10);
}

TEST(Cli, OutputFilesAndDeterminism) {
  const auto dir = std::filesystem::temp_directory_path() / "wd_cli_lib_test";
  std::filesystem::remove_all(dir);
  RunConfig cfg = small("haldane", 16);
  cfg.l_list = {4, 8};
  cfg.output_dir = dir.string();
  cfg.format = "csv";
  const RunResult a = run("dichotomy", cfg), b = run("dichotomy", cfg);
  EXPECT_NE(a.status, 1) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_TRUE(std::filesystem::exists(dir / "dichotomy.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "dichotomy_per_L.csv"));
  std::ifstream in(dir / "dichotomy.json");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), a.out);
  const Json j = Json::parse(a.out);
  for (const char* key : {"model", "params", "N", "chern_int", "chern_float", "per_L", "hs_table", "exp_fit",
                          "classification"})
    EXPECT_TRUE(j.contains(key)) << key;
  std::filesystem::remove_all(dir);
}
