#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "harvest/commands.hpp"
#include "harvest/csv.hpp"
#include "harvest/error.hpp"

using namespace harvest;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("harvest_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run(const std::string& cmd, const RunConfig& c) {
  std::ostringstream log, err;
  return run_command(cmd, c, log, err);
}

const char* kJumps = R"({
  "rates": {"lambda_x": 0.1},
  "kernels": {"biomass": {"kind": "uniform", "z_lo": 0.8, "z_hi": 1.2}}
})";

}  // namespace

TEST_CASE("config defaults reproduce the baseline model") {
  const RunConfig c = parse_config("{}");
  CHECK(c.bio.r == 1.0);
  CHECK(c.bio.K == 1.0);
  CHECK(c.econ.p == 2.0);
  CHECK(c.econ.c == 1.0);
  CHECK(c.econ.delta == 0.05);
  CHECK(c.rates.total() == 0.0);
  CHECK(c.seed == 42);
  CHECK_FALSE(c.dual());
  CHECK(c.hash.size() == 16);
}

TEST_CASE("config rejects unknown keys, wrong types and invalid values") {
  CHECK_THROWS_AS(parse_config("{\"model\": {\"rr\": 1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"modle\": {}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"model\": {\"r\": \"fast\"}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"model\": {\"K\": -1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"rates\": {\"lambda_x\": -0.1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"rates\": {\"lambda_x\": 0.1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"rates\": {\"lambda_r\": 0.1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"kernels\": {\"biomass\": {\"kind\": \"gaussian\"}}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"kernels\": {\"growth\": {\"kind\": \"uniform\"}}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"simulate\": {\"replicates\": 1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"model\": "), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"rates": {"lambda_r": 0.1}, "kernels": {"growth": {"kind": "growth", "xi": 0.2,
    "distribution": {"support": [-1, 1], "weights": [0.25, 0.75]}}}})"),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/harvest.json"), ConfigError);
}

TEST_CASE("config hash ignores seed, output directory and comments") {
  const RunConfig a = parse_config(kJumps);
  const RunConfig b = parse_config(R"({
    // same model, different run settings
    "rates": {"lambda_x": 0.1},
    "kernels": {"biomass": {"kind": "uniform", "z_lo": 0.8, "z_hi": 1.2}},
    "seed": 7,
    "output_dir": "elsewhere"
  })");
  CHECK(a.hash == b.hash);
  CHECK(b.seed == 7);
  CHECK(b.output_dir == fs::path("elsewhere"));
  const RunConfig c = parse_config(R"({"rates": {"lambda_x": 0.2},
    "kernels": {"biomass": {"kind": "uniform", "z_lo": 0.8, "z_hi": 1.2}}})");
  CHECK(a.hash != c.hash);
}

TEST_CASE("config parses kernels and distributions") {
  const RunConfig c = parse_config(R"({
    "rates": {"lambda_x": 0.05, "lambda_r": 0.05},
    "kernels": {
      "biomass": {"kind": "centered", "epsilon": 0.05, "distribution": {"mean": 0.5}},
      "growth": {"kind": "growth", "xi": 0.2, "distribution": {"support": [-1, 1], "weights": [0.25, 0.75], "asymmetric": true}}
    },
    "solver": {"n": 1001, "n_r": 11}
  })");
  REQUIRE(c.kernels.biomass);
  REQUIRE(c.kernels.growth);
  CHECK(c.kernels.biomass->kind() == KernelKind::centered);
  CHECK(c.kernels.growth->kind() == KernelKind::growth);
  CHECK(c.dual());
  CHECK(c.grid.n == 1001);
  CHECK(c.grid.n_r == 11);
}

TEST_CASE("csv writer emits the hash line, header and quoted cells") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  {
    CsvWriter w(dir / "t.csv", "00ff", 9, {"a", "b", "c"});
    w.row({1.5, 2LL, std::string("x,y")});
    w.row({0.1, -3LL, std::string("say \"hi\"")});
    CHECK_THROWS_AS(w.row({1.0}), std::invalid_argument);
    CHECK(w.rows() == 2);
  }
  const auto l = lines(dir / "t.csv");
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "# config_hash=00ff seed=9");
  CHECK(l[1] == "a,b,c");
  CHECK(l[2] == "1.5,2,\"x,y\"");
  CHECK(l[3] == "0.10000000000000001,-3,\"say \"\"hi\"\"\"");
  fs::remove_all(dir);
}

TEST_CASE("solve writes one value row per node and one threshold row") {
  RunConfig c = parse_config("{}");
  c.output_dir = scratch("solve");
  CHECK(run("solve", c) == kExitOk);
  const auto value = lines(c.output_dir / "value.csv");
  CHECK(value.size() == c.grid.n + 2);
  CHECK(value[0] == "# config_hash=" + c.hash + " seed=42");
  CHECK(value[1] == "x,V,V_prime");
  const auto xs = lines(c.output_dir / "xstar.csv");
  REQUIRE(xs.size() == 3);
  CHECK(std::abs(std::stod(xs[2]) - 0.7418497726) < 1e-8);
  fs::remove_all(c.output_dir);
}

TEST_CASE("dual solve writes the critical curve") {
  RunConfig c = parse_config(R"({
    "rates": {"lambda_r": 0.05},
    "kernels": {"growth": {"kind": "growth", "xi": 0.2}},
    "solver": {"n": 1001, "n_r": 11}
  })");
  c.output_dir = scratch("dual");
  CHECK(run("solve", c) == kExitOk);
  CHECK(lines(c.output_dir / "xstar_curve.csv").size() == 11 + 2);
  CHECK(lines(c.output_dir / "value2d.csv").size() == 11 * 1001 + 2);
  CHECK(lines(c.output_dir / "value2d.csv")[1] == "x,r,V,Vx");
  fs::remove_all(c.output_dir);
}

TEST_CASE("simulate writes flagged trajectories and a summary") {
  RunConfig c = parse_config(kJumps);
  c.simulate.replicates = 50;
  c.simulate.trajectories = 2;
  c.simulate.horizon = 40.0;
  c.output_dir = scratch("simulate");
  CHECK(run("simulate", c) == kExitOk);
  const auto t = lines(c.output_dir / "trajectory_0.csv");
  REQUIRE(t.size() > 3);
  CHECK(t[1] == "time,biomass,growth_rate,effort,event_flag,x_star_level");
  const auto s = lines(c.output_dir / "mc_summary.csv");
  CHECK(s.size() == 3);
  CHECK(fs::exists(c.output_dir / "trajectory_1.csv"));
  fs::remove_all(c.output_dir);
}

TEST_CASE("exit codes") {
  RunConfig c = parse_config(kJumps);
  c.output_dir = scratch("exit");
  c.solver.max_iter = 3;
  CHECK(run("solve", c) == kExitNonConvergence);
  CHECK(fs::exists(c.output_dir / "gaps.csv"));
  CHECK(run("unknown", c) == kExitConfigError);

  RunConfig v = parse_config(R"({"verify": {"dual": false}, "sensitivity": {"epsilon_list": [0.3, 0.6, 0.9]}})");
  v.output_dir = c.output_dir;
  CHECK(run("verify", v) == kExitVerificationFailure);
  bool saw_fail = false;
  for (const auto& l : lines(v.output_dir / "verify_report.csv")) saw_fail = saw_fail || l.ends_with(",FAIL");
  CHECK(saw_fail);
  fs::remove_all(c.output_dir);
}
