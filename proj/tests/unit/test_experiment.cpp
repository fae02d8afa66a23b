#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "pointflow/experiment.hpp"

namespace fs = std::filesystem;

namespace pointflow {
namespace {

const char* kBase = R"({
  "mesh": {"n": 6, "grading_levels": 1},
  "physics": {"nu": 1.0, "eta": 0.001, "alpha": 1.5},
  "sources": [{"point": [0.5, 0.5], "control": [0.0, 0.0]}],
  "target": {"preset": "uniform", "scale": 2.0},
  "mode": "solve",
  "seed": 7
})";

nlohmann::json base() { return nlohmann::json::parse(kBase); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) header.push_back(c);
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string c;
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; std::getline(ss, c, ','); ++i) row[header.at(i)] = c;
    rows.push_back(row);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pointflow-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const fs::path& config, const fs::path& out, const fs::path& log, const std::string& extra = "") {
  const std::string cmd = std::string("\"") + POINTFLOW_CLI + "\" run \"" + config.string() + "\" --out \"" +
                          out.string() + "\" " + extra + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string config_error(const nlohmann::json& j) {
  try {
    parse_config(j.dump());
  } catch (const ConfigError& e) {
    return e.field() + ": " + e.what();
  }
  return "";
}

TEST(ParseConfig, DefaultsAndValues) {
  const auto c = parse_config(kBase);
  EXPECT_EQ(c.n, 6);
  EXPECT_EQ(c.grading_levels, 1);
  EXPECT_EQ(c.mode, RunMode::solve);
  EXPECT_EQ(c.seed, 7u);
  ASSERT_EQ(c.sources.size(), 1u);
  EXPECT_EQ(c.sources[0].lower, Vec2(-1, -1));
  EXPECT_EQ(c.target.preset, "uniform");
  EXPECT_EQ(c.newton_tol, 1e-10);
}

TEST(ParseConfig, OverridesApply) {
  const auto c = parse_config(kBase, {std::string("elsewhere"), 99u});
  EXPECT_EQ(c.output_dir, "elsewhere");
  EXPECT_EQ(c.seed, 99u);
}

TEST(ParseConfig, RangeErrorsNameTheField) {
  auto j = base();
  j["physics"]["alpha"] = 2.5;
  EXPECT_NE(config_error(j).find("alpha must lie in (0,2)"), std::string::npos);
  j = base();
  j["physics"]["nu"] = 0.0;
  EXPECT_NE(config_error(j).find("physics.nu"), std::string::npos);
  j = base();
  j["physics"]["eta"] = -1.0;
  EXPECT_NE(config_error(j).find("physics.eta"), std::string::npos);
  j = base();
  j["sources"][0]["lower"] = {0.0, 0.0};
  j["sources"][0]["upper"] = {1.0, 0.0};
  EXPECT_NE(config_error(j).find("sources[0]"), std::string::npos);
  j = base();
  j["sources"][0]["point"] = {1.0, 0.5};
  EXPECT_NE(config_error(j).find("sources[0].point"), std::string::npos);
  j = base();
  j["mode"] = "dance";
  EXPECT_NE(config_error(j).find("mode"), std::string::npos);
  j = base();
  j["mesh"]["colour"] = 3;
  EXPECT_NE(config_error(j).find("colour"), std::string::npos);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(ContentHash, MatchesGitBlobIds) {
  EXPECT_EQ(content_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(content_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(ContentHash, ChangesIffConfigChanges) {
  const std::string h0 = content_hash(parse_config(kBase).canonical_json());
  auto reordered = nlohmann::json::parse(kBase);
  EXPECT_EQ(content_hash(parse_config(reordered.dump()).canonical_json()), h0);
  const std::vector<std::pair<nlohmann::json::json_pointer, nlohmann::json>> edits = {
      {"/mesh/n"_json_pointer, 7},
      {"/mesh/grading_ratio"_json_pointer, 0.4},
      {"/physics/nu"_json_pointer, 0.5},
      {"/physics/eta"_json_pointer, 0.002},
      {"/physics/alpha"_json_pointer, 1.25},
      {"/sources/0/control"_json_pointer, {0.1, 0.0}},
      {"/target/scale"_json_pointer, 3.0},
      {"/mode"_json_pointer, "optimize"},
      {"/seed"_json_pointer, 8},
      {"/tolerances/newton_tol"_json_pointer, 1e-9},
      {"/checks/samples"_json_pointer, 4},
      {"/regularity/ladder"_json_pointer, {8, 16}},
      {"/output/vtk"_json_pointer, true},
  };
  for (const auto& [ptr, value] : edits) {
    auto j = base();
    j[ptr] = value;
    EXPECT_NE(content_hash(parse_config(j.dump()).canonical_json()), h0) << ptr.to_string();
  }
}

TEST(CsvNumber, SeventeenSignificantDigits) {
  EXPECT_EQ(csv_number(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(csv_number(-2.0), "-2.0000000000000000e+00");
  EXPECT_EQ(std::stod(csv_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Cli, SolveWithZeroControlHasZeroStateAndTargetCost) {
  const auto dir = scratch("solve");
  auto j = base();
  j["output"]["vtk"] = true;
  ASSERT_EQ(run_cli(write_config(dir, j), dir / "out", dir / "log.txt"), 0) << read_file(dir / "log.txt");
  const auto rows = read_csv(dir / "out" / "solve.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(std::stod(rows[0].at("cost")), 2.0, 1e-12);  // 1/2 * |(2,0)|^2 * area
  for (const auto& r : read_csv(dir / "out" / "state_field.csv")) {
    EXPECT_EQ(std::stod(r.at("ux")), 0.0);
    EXPECT_EQ(std::stod(r.at("uy")), 0.0);
  }
  EXPECT_TRUE(fs::exists(dir / "out" / "state.vtk"));
  const auto manifest = nlohmann::json::parse(read_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("status"), "ok");
  EXPECT_EQ(manifest.at("config_hash"), content_hash(parse_config(j.dump(), {(dir / "out").string(), {}}).canonical_json()));
}

TEST(Cli, InvalidConfigExitsTwo) {
  const auto dir = scratch("invalid");
  auto j = base();
  j["physics"]["alpha"] = 2.5;
  EXPECT_EQ(run_cli(write_config(dir, j), dir / "out", dir / "log.txt"), 2);
  EXPECT_NE(read_file(dir / "log.txt").find("alpha must lie in (0,2)"), std::string::npos);
  EXPECT_EQ(run_cli(dir / "missing.json", dir / "out", dir / "log2.txt"), 2);
}

TEST(Cli, SolverFailureExitsThree) {
  const auto dir = scratch("failure");
  auto j = base();
  j["physics"]["nu"] = 1e-4;
  j["sources"][0]["control"] = {500.0, 500.0};
  j["sources"][0]["lower"] = {-1000.0, -1000.0};
  j["sources"][0]["upper"] = {1000.0, 1000.0};
  j["tolerances"]["newton_max_iters"] = 1;
  EXPECT_EQ(run_cli(write_config(dir, j), dir / "out", dir / "log.txt"), 3) << read_file(dir / "log.txt");
  const auto manifest = nlohmann::json::parse(read_file(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("status"), "failed");
}

TEST(Cli, GradientCheckWithinTolerance) {
  const auto dir = scratch("gradient");
  auto j = base();
  j["mode"] = "gradient-check";
  j["physics"]["nu"] = 0.1;
  j["target"] = {{"preset", "vortex"}, {"scale", 1.0}};
  j["checks"] = {{"samples", 2}};
  ASSERT_EQ(run_cli(write_config(dir, j), dir / "out", dir / "log.txt"), 0) << read_file(dir / "log.txt");
  const auto rows = read_csv(dir / "out" / "gradient_check.csv");
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_LE(std::stod(r.at("rel_error")), 1e-4);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto dir = scratch("determinism");
  auto j = base();
  j["mode"] = "hessian-check";
  j["physics"]["nu"] = 0.1;
  j["target"] = {{"preset", "vortex"}, {"scale", 1.0}};
  j["checks"] = {{"samples", 2}};
  const auto cfg = write_config(dir, j);
  ASSERT_EQ(run_cli(cfg, dir / "a", dir / "log.txt"), 0) << read_file(dir / "log.txt");
  ASSERT_EQ(run_cli(cfg, dir / "b", dir / "log.txt"), 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().extension() != ".csv") continue;
    EXPECT_EQ(read_file(e.path()), read_file(dir / "b" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_GT(compared, 0);
  // a different seed draws different check directions
  ASSERT_EQ(run_cli(cfg, dir / "c", dir / "log.txt", "--seed 8"), 0);
  EXPECT_NE(read_file(dir / "a" / "hessian_check.csv"), read_file(dir / "c" / "hessian_check.csv"));
}

TEST(RegularityStudy, LadderRows) {
  auto j = base();
  j["mode"] = "regularity-study";
  j["sources"][0]["control"] = {1.0, 0.5};
  j["regularity"] = {{"ladder", {8}}};
  EXPECT_EQ(regularity_study(parse_config(j.dump())).size(), 1u);
  j["regularity"] = {{"ladder", {4, 8, 16}}};
  const auto rows = regularity_study(parse_config(j.dump()));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LT(rows[0].grad_l2, rows[1].grad_l2);
  EXPECT_LT(rows[1].grad_l2, rows[2].grad_l2);
  for (const auto& r : rows) EXPECT_TRUE(r.converged);
}

}  // namespace
}  // namespace pointflow
