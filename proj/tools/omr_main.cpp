#include <iostream>

#include <CLI11.hpp>

#include "omr/cli.hpp"

int main(int argc, char** argv) {
  using namespace omr::cli;
  CLI::App app{"Contextual posted-price learning toolkit"};
  app.require_subcommand(1);

  std::filesystem::path out_dir = default_out_dir();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a configured experiment");
  simulate->add_option("--config", sim.config, "Config file")->required()->check(CLI::ExistingFile);
  std::uint64_t sim_seed = 0;
  std::size_t sim_reps = 0;
  std::string sim_mode;
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "Master seed (overrides the config)");
  auto* reps_opt = simulate->add_option("--replications", sim_reps, "Replications (overrides the config)");
  auto* mode_opt = simulate->add_option("--mode", sim_mode, "Expert set mode")->check(CLI::IsMember({"exact", "sampled"}));
  simulate->add_option("--out-dir", out_dir, "Output directory (default $OMR_OUT_DIR or .)");

  VerifyOptions ver;
  auto* verify = app.add_subcommand("verify", "Run a property verifier");
  verify->add_option("check", ver.check, "Verifier id")->required();
  verify->add_option("--seed", ver.seed, "Seed");
  std::vector<std::string> params;
  verify->add_option("--param", params, "Parameter override key=value (repeatable)");
  double theta = -1.0, bid = -1.0;
  verify->add_option("--theta", theta, "Shorthand for --param theta=...");
  verify->add_option("--bid", bid, "Shorthand for --param bid=...");
  verify->add_option("--out-dir", out_dir, "Also write <id>.json here");

  SketchOptions sk;
  auto* sketch = app.add_subcommand("sketch", "Sketch a weight vector against a context sequence");
  sketch->add_option("--weights", sk.weights, "One-row CSV with w")->required();
  sketch->add_option("--contexts", sk.contexts, "CSV, one context per row")->required();
  sketch->add_option("--epsilon", sk.epsilon, "Accuracy parameter");
  std::string sketch_out;
  sketch->add_option("--output", sketch_out, "Write the sketch here instead of stdout");

  EnumerateOptions en;
  auto* enumerate = app.add_subcommand("enumerate-experts", "Count or list the sketch set");
  enumerate->add_option("--horizon", en.horizon, "T")->required();
  enumerate->add_option("--epsilon", en.epsilon, "Accuracy parameter");
  enumerate->add_option("--grid-step", en.grid_step, "Coefficient grid step override");
  enumerate->add_option("--max-multiplier", en.max_multiplier, "Largest multiplier override");
  enumerate->add_option("--max-support", en.max_support, "Largest support override");
  enumerate->add_option("--cap", en.cap, "Enumeration cap");
  enumerate->add_flag("--list", en.list, "List every sketch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (*simulate) {
    if (*seed_opt) sim.seed = sim_seed;
    if (*reps_opt) sim.replications = sim_reps;
    if (*mode_opt) sim.mode = sim_mode;
    sim.out_dir = out_dir;
    return cmd_simulate(sim, std::cout, std::cerr);
  }
  if (*verify) {
    for (const auto& kv : params) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "config error: --param needs key=value\n";
        return kConfigError;
      }
      try {
        ver.params[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1));
      } catch (const std::exception&) {
        std::cerr << "config error: bad number in --param " << kv << "\n";
        return kConfigError;
      }
    }
    if (theta >= 0.0) ver.params["theta"] = theta;
    if (bid >= 0.0) ver.params["bid"] = bid;
    ver.out_dir = out_dir;
    ver.write_file = verify->count("--out-dir") > 0 || std::getenv("OMR_OUT_DIR") != nullptr;
    return cmd_verify(ver, std::cout, std::cerr);
  }
  if (*sketch) {
    if (!sketch_out.empty()) sk.output = sketch_out;
    return cmd_sketch(sk, std::cout, std::cerr);
  }
  return cmd_enumerate_experts(en, std::cout, std::cerr);
}
