#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "wplap/config.hpp"
#include "wplap/errors.hpp"
#include "wplap/runner.hpp"

using namespace wplap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "wplap_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string demo_text(const std::string& out_dir, int nodes = 9,
                      const std::string& extra = "") {
  std::ostringstream os;
  os << "[problem]\np = 1.5\nq = 3.0\ngamma = 1.3\nmu = 0.05\nn = 1\nm = 1\n"
     << "[domain]\nlo = 0 0\nhi = 1 1\ncounts = " << nodes << " " << nodes
     << "\n[weights]\nomega = constant 1\nv = constant 1\n"
     << "[verify]\nk0_samples = 100\n"
     << extra << "[output]\ndir = " << out_dir << "\n";
  return os.str();
}

json read_json(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  json j;
  is >> j;
  return j;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(WPLAP_CLI_PATH) + " " + args +
                    " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config reference text parses back to defaults") {
  ExperimentConfig cfg = parse_config_text(config_reference());
  CHECK(cfg.params.p == 2.0);
  CHECK(cfg.verify.fiber_points == 200);
  CHECK(cfg.verify.k0_resolution == 192);
}

TEST_CASE("strict parsing rejects malformed configs") {
  CHECK_THROWS_AS(parse_config_text("[problem]\nbogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nonsense]\np = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[problem]\np = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(demo_text("x") + "[verify]\nk0_resolution = 4\n"),
                  ConfigError);
  // gamma must exceed 1; the finer range checks live in the weight report
  std::string bad = demo_text("x");
  bad.replace(bad.find("gamma = 1.3"), 11, "gamma = 1.0");
  CHECK_THROWS_AS(parse_config_text(bad), ConfigError);
}

TEST_CASE("check-weights writes a passing weights report") {
  fs::path dir = fresh_dir("cw");
  ExperimentConfig cfg = parse_config_text(demo_text(dir.string()));
  RunOutcome out = cmd_check_weights(cfg);
  CHECK(out.exit_code == 0);
  json j = read_json(dir / "weights.json");
  CHECK(j["command"] == "check-weights");
  CHECK(j["seed"] == 0);
  CHECK(j["pass"] == true);
  CHECK(j["failures"].empty());
  CHECK(j["ap"]["diverged"] == false);
  CHECK(j["compactness"]["pass"] == true);
  CHECK(fs::exists(dir / "metadata.json"));
}

TEST_CASE("check-weights fails a non-doubling power weight") {
  fs::path dir = fresh_dir("cw_bad");
  std::string text = demo_text(dir.string());
  text.replace(text.find("omega = constant 1"), 18, "omega = power 1.5 ");
  ExperimentConfig cfg = parse_config_text(text);
  RunOutcome out = cmd_check_weights(cfg);
  CHECK(out.exit_code == 3);
  CHECK(out.message.find("weight-condition failed") != std::string::npos);
  json j = read_json(dir / "weights.json");
  CHECK(j["pass"] == false);
  CHECK(!j["failures"].empty());
}

TEST_CASE("solve produces two distinct branches and repeats bytewise") {
  fs::path d1 = fresh_dir("solve1"), d2 = fresh_dir("solve2");
  ExperimentConfig cfg = parse_config_text(demo_text(d1.string()));
  RunOutcome out = cmd_solve(cfg);
  CHECK(out.exit_code == 0);
  json j = read_json(d1 / "summary.json");
  CHECK(j["pass"] == true);
  CHECK(j["u1"]["present"] == true);
  CHECK(j["u0"]["present"] == true);
  CHECK(j["u1"]["energy"]["I"].get<double>() < 0.0);
  CHECK(j["u0"]["energy"]["I"].get<double>() > 0.0);
  CHECK(j["u1"]["weakform"].get<double>() <= 1e-6);
  CHECK(j["u0"]["weakform"].get<double>() <= 1e-6);
  CHECK(j["branches_distinct"]["pass"] == true);
  CHECK(fs::exists(d1 / "u1.csv"));
  CHECK(fs::exists(d1 / "u0.csv"));
  CHECK(fs::exists(d1 / "iterations.csv"));

  cfg.out_dir = d2.string();
  cmd_solve(cfg);
  CHECK(read_bytes(d1 / "summary.json") == read_bytes(d2 / "summary.json"));
  CHECK(read_bytes(d1 / "u1.csv") == read_bytes(d2 / "u1.csv"));
}

TEST_CASE("solve without the concave term exits through the solver code") {
  fs::path dir = fresh_dir("solve_mu0");
  std::string text = demo_text(dir.string());
  text.replace(text.find("mu = 0.05"), 9, "mu = 0.0 ");
  ExperimentConfig cfg = parse_config_text(text);
  RunOutcome out = cmd_solve(cfg);
  CHECK(out.exit_code == 4);
  CHECK(out.message.find("solve failed") != std::string::npos);
  json j = read_json(dir / "summary.json");
  CHECK(j["pass"] == false);
  CHECK(j["u1"]["present"] == false);
}

TEST_CASE("verify passes the demo and repeats bytewise") {
  fs::path d1 = fresh_dir("verify1"), d2 = fresh_dir("verify2");
  ExperimentConfig cfg = parse_config_text(demo_text(d1.string()));
  RunOutcome out = cmd_verify(cfg);
  CHECK(out.exit_code == 0);
  json j = read_json(d1 / "inequalities.json");
  CHECK(j["pass"] == true);
  CHECK(j["poincare"]["stable"] == true);
  CHECK(j["fibering"]["max_rel_gap"].get<double>() <= 1e-12);
  CHECK(j["sphere"]["pass"] == true);
  CHECK(j["oracles"]["all_pass"] == true);
  CHECK(fs::exists(d1 / "fibering.csv"));

  cfg.out_dir = d2.string();
  cmd_verify(cfg);
  CHECK(read_bytes(d1 / "inequalities.json") ==
        read_bytes(d2 / "inequalities.json"));
  CHECK(read_bytes(d1 / "fibering.csv") == read_bytes(d2 / "fibering.csv"));
}

TEST_CASE("an impossible stability band fails verification") {
  fs::path dir = fresh_dir("verify_strict");
  ExperimentConfig cfg = parse_config_text(
      demo_text(dir.string(), 9, "[verify]\nstable_fraction = 0\n"));
  RunOutcome out = cmd_verify(cfg);
  CHECK(out.exit_code == 5);
  CHECK(out.message.find("verification failed") != std::string::npos);
  json j = read_json(dir / "inequalities.json");
  CHECK(j["pass"] == false);
}

TEST_CASE("report merges whatever the run directory holds") {
  fs::path dir = fresh_dir("report");
  ExperimentConfig cfg = parse_config_text(demo_text(dir.string()));
  cmd_check_weights(cfg);
  RunOutcome out = cmd_report(dir.string());
  CHECK(out.exit_code == 0);
  json j = read_json(dir / "report.json");
  CHECK(j["sections"].size() == 1);
  CHECK(j["sections"][0] == "weights");
  CHECK(j["pass"] == true);
  CHECK(j["solve"].is_null());
  CHECK(fs::exists(dir / "report.csv"));

  CHECK(cmd_report((dir / "missing").string()).exit_code == 2);
  fs::path empty = fresh_dir("report_empty");
  CHECK(cmd_report(empty.string()).exit_code == 2);
}

TEST_CASE("command line front end maps flags and errors") {
  fs::path dir = fresh_dir("front");
  fs::path cfgfile = dir / "exp.ini";
  {
    std::ofstream os(cfgfile);
    os << demo_text((dir / "run").string());
  }
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("--config-reference") == 0);
  CHECK(run_cli("") == 2);                      // a subcommand is required
  CHECK(run_cli("solve --bogus") == 2);         // unknown flag
  CHECK(run_cli("solve") == 2);                 // missing --config
  CHECK(run_cli("report") == 2);                // needs --out or --config
  {
    std::ofstream os(dir / "broken.ini");
    os << "[problem]\np = nope\n";
  }
  CHECK(run_cli("check-weights --config " + (dir / "broken.ini").string()) == 2);

  int rc = run_cli("check-weights --config " + cfgfile.string() +
                   " --seed 7 --threads 4 --out " + (dir / "alt").string());
  CHECK(rc == 0);
  json j = read_json(dir / "alt" / "weights.json");
  CHECK(j["seed"] == 7);
}
