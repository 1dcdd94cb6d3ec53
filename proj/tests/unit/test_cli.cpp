#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omr/cli.hpp"

using namespace omr;
using namespace omr::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("omr_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

const char* kMinimal =
    "# one round, fixed seller\n"
    "horizon = 1\n"
    "dimension = 1\n"
    "seller = fixed\n"
    "fixed_weight = 0.4\n"
    "environment = fixed\n"
    "environment_file = env.csv\n"
    "opt_mode = grid\n";

int run_tool(const std::string& args) {
  int status = std::system((std::string(OMR_TOOL_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parse and canonical emit") {
  auto c = parse_config("horizon = 10\nepsilon = 0.1  # comment\nseller = sum\nbuyer_strategies = shade:0.1\n");
  CHECK(c.horizon == 10);
  CHECK(c.epsilon == 0.1);
  CHECK(c.buyer_strategies == std::vector<std::string>{"shade:0.1"});
  auto text = emit_config(c);
  CHECK(parse_config(text) == c);
  CHECK(emit_config(parse_config(text)) == text);
}

TEST_CASE("config round trip keeps every double") {
  ExperimentConfig c;
  c.epsilon = 0.1 + 0.2 - 0.3 + 0.2;
  c.gamma_bar = 1.0 / 3.0;
  c.opt_grid_resolution = 0.0123456789012345678;
  c.rho_override = 1e-7;
  c.buyers = 2;
  c.partition = "round-robin";
  c.gammas = {0.1, 1.0 / 7.0};
  auto back = parse_config(emit_config(c));
  CHECK(back == c);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("horizn = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("horizon 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("horizon = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("horizon = 3\nhorizon = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seller = sum\nepsilon = 0.6\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seller = sum\nepsilon = 0.3\n"), ConfigError);
  CHECK_NOTHROW(parse_config("seller = omr\nepsilon = 0.3\n"));
  CHECK_THROWS_AS(parse_config("buyers = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("gamma_bar = 1\n"), ConfigError);
}

TEST_CASE("trace rows round trip losslessly") {
  std::vector<TraceRow> rows = {
      {1, 1, {0.6, 0.8}, 0.1 + 0.2, 1.0 / 3.0, 0.7, true, 1, 0, -1},
      {2, 2, {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)}, -0.25, 0.0, 1.0, false, -1, -1, 42}};
  auto text = emit_trace(rows);
  CHECK(parse_trace(text) == rows);
  CHECK(emit_trace(parse_trace(text)) == text);
  CHECK(text.substr(0, text.find('\n')) ==
        "round,buyer_index,context,price,bid,true_value,sold,omega,xi,expert_id");
  CHECK_THROWS(parse_trace("bad header\n"));
}

TEST_CASE("simulate a single round") {
  auto dir = scratch("minimal");
  put(dir / "env.csv", "1.0,0.5\n");
  put(dir / "run.cfg", std::string(kMinimal) + "environment_file = " + (dir / "env.csv").string() + "\n");
  // Duplicate key: the config above already names a file.
  std::ostringstream out, err;
  SimulateOptions o;
  o.config = dir / "run.cfg";
  o.out_dir = dir / "out";
  CHECK(cmd_simulate(o, out, err) == kConfigError);

  std::string cfg = kMinimal;
  cfg.replace(cfg.find("env.csv"), 7, (dir / "env.csv").string());
  put(dir / "run.cfg", cfg);
  CHECK(cmd_simulate(o, out, err) == kOk);
  auto rows = parse_trace(slurp(dir / "out" / "trace.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].price == doctest::Approx(0.4));
  CHECK(rows[0].sold);
  auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["revenue"]["mean"].get<double>() == doctest::Approx(0.4));
  CHECK(summary["opt_truth"]["mean"].get<double>() == doctest::Approx(0.5));
  CHECK(summary["regret"].contains("standard_error"));
  CHECK(summary["opt_truth"].contains("error_bound"));
}

TEST_CASE("simulate is byte-for-byte deterministic") {
  auto dir = scratch("determinism");
  put(dir / "run.cfg",
      "horizon = 60\ndimension = 2\nepsilon = 0.25\nseller = sum\nexpert_grid_step = 0.25\n"
      "expert_max_multiplier = 4\nexpert_max_support = 1\nenvironment = tracker\nreplications = 3\n"
      "rho_override = 0.2\nopt_grid_resolution = 0.05\nseed = 11\n");
  std::ostringstream out, err;
  SimulateOptions o;
  o.config = dir / "run.cfg";
  o.out_dir = dir / "a";
  REQUIRE(cmd_simulate(o, out, err) == kOk);
  o.out_dir = dir / "b";
  REQUIRE(cmd_simulate(o, out, err) == kOk);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));
  CHECK(parse_trace(slurp(dir / "a" / "trace.csv")).size() == 60);
  o.seed = 12;
  o.out_dir = dir / "c";
  REQUIRE(cmd_simulate(o, out, err) == kOk);
  CHECK(slurp(dir / "a" / "trace.csv") != slurp(dir / "c" / "trace.csv"));
}

TEST_CASE("simulate reports an oversized expert set") {
  auto dir = scratch("cap");
  put(dir / "run.cfg", "horizon = 50\nepsilon = 0.5\nexpert_cap = 1000\n");
  std::ostringstream out, err;
  SimulateOptions o;
  o.config = dir / "run.cfg";
  o.out_dir = dir;
  CHECK(cmd_simulate(o, out, err) == kCapExceeded);
  o.mode = "sampled";
  CHECK(cmd_simulate(o, out, err) == kOk);
}

TEST_CASE("verify command") {
  std::ostringstream out, err;
  VerifyOptions o;
  o.check = "random-pricing";
  o.params = {{"theta", 0.8}, {"bid", 0.5}, {"samples", 20000}};
  CHECK(cmd_verify(o, out, err) == kOk);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["details"]["closed_form"].get<double>() == doctest::Approx(0.045));
  CHECK(out.str().find("0.045") != std::string::npos);

  o.check = "no-such-check";
  CHECK(cmd_verify(o, out, err) == kConfigError);
  o.check = "random-pricing";
  o.params = {{"thetta", 0.5}};
  CHECK(cmd_verify(o, out, err) == kConfigError);
}

TEST_CASE("sketch command") {
  auto dir = scratch("sketch");
  std::ostringstream out, err;
  SketchOptions o;
  o.epsilon = 0.5;
  o.weights = dir / "w.csv";
  o.contexts = dir / "x.csv";
  put(o.weights, "0.0,0.0\n");
  put(o.contexts, "1,0\n0,1\n");
  CHECK(cmd_sketch(o, out, err) == kOk);
  auto z = nlohmann::json::parse(out.str());
  CHECK(z["support"].empty());

  put(o.contexts, "1,0,0\n");
  CHECK(cmd_sketch(o, out, err) == kConfigError);

  put(o.weights, "0.5\n");
  put(o.contexts, "1\n1\n1\n");
  std::ostringstream out2;
  CHECK(cmd_sketch(o, out2, err) == kOk);
  auto z2 = nlohmann::json::parse(out2.str());
  CHECK(z2["updates"].get<int>() == 12);
  CHECK(z2["multipliers"][0].get<int>() == 12);
  CHECK(z2["grid_step"].get<double>() == 0.03125);
}

TEST_CASE("enumerate-experts command") {
  std::ostringstream out, err;
  EnumerateOptions o;
  o.horizon = 2;
  o.epsilon = 0.5;
  o.grid_step = 0.5;
  o.max_multiplier = 1;
  o.max_support = 2;
  o.list = true;
  CHECK(cmd_enumerate_experts(o, out, err) == kOk);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["count"].get<int>() == 16);
  CHECK(j["sketches"].size() == 16);

  EnumerateOptions big;
  big.horizon = 20;
  big.epsilon = 0.5;
  big.list = true;
  CHECK(cmd_enumerate_experts(big, out, err) == kCapExceeded);
}

TEST_CASE("command-line tool exit codes") {
  auto dir = scratch("tool");
  CHECK(run_tool("verify no-such-check") == kConfigError);
  CHECK(run_tool("verify random-pricing --theta 0.8 --bid 0.5 --param samples=10000") == kOk);
  put(dir / "bad.cfg", "seller = sum\nepsilon = 0.6\n");
  CHECK(run_tool("simulate --config " + (dir / "bad.cfg").string() + " --out-dir " + dir.string()) ==
        kConfigError);
  CHECK(run_tool("enumerate-experts --horizon 20 --epsilon 0.5 --list") == kCapExceeded);
}
