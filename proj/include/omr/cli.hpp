#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "omr/analysis.hpp"
#include "omr/core.hpp"
#include "omr/protocol.hpp"

namespace omr::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::size_t horizon = 100;
  std::size_t dimension = 2;
  double epsilon = 0.25;
  double gamma_bar = 0.5;
  std::vector<double> gammas;  // empty: every buyer uses gamma_bar
  int buyers = 1;
  std::string partition = "single";  // single | round-robin | blocks
  std::string environment = "iid";   // iid | tracker | rotation | fixed
  std::string environment_file;      // CSV for environment = fixed
  std::string seller = "omr";        // omr | sum | copy | fixed
  std::vector<double> fixed_weight;  // for seller = fixed
  std::vector<std::string> buyer_strategies;  // one per buyer; empty: all truthful
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  std::string expert_mode = "exact";  // exact | sampled
  double expert_grid_step = 0.0;      // 0: eps^2 / 8
  std::int64_t expert_max_multiplier = 0;  // 0: floor(2 / step)
  std::size_t expert_max_support = 0;      // 0: ceil(16 / eps^2)
  std::uint64_t expert_cap = 1000000;
  std::size_t expert_pool = 64;
  std::string opt_mode = "grid";  // grid | sketch | none
  double opt_grid_resolution = 1e-2;
  double tolerance = kDefaultTolerance;
  std::optional<double> rho_override;
  std::string trace_file = "trace.csv";
  std::string summary_file = "summary.json";

  bool operator==(const ExperimentConfig&) const = default;
};

// Flat "key = value" lines; '#' starts a comment. Lists are comma separated.
// Throws ConfigError on syntax errors, unknown keys, and invalid values.
ExperimentConfig parse_config(const std::string& text);
// Canonical form: every key in a fixed order, doubles in shortest round-trip form.
std::string emit_config(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// 17 significant digits.
std::string format_double(double x);
double parse_double(const std::string& s);

struct TraceRow {
  std::size_t round = 0;
  int buyer_index = 0;
  Vector context;
  double price = 0.0;
  double bid = 0.0;
  double true_value = 0.0;
  bool sold = false;
  int omega = -1;  // -1: the seller has no such coin
  int xi = -1;
  long long expert_id = -1;

  bool operator==(const TraceRow&) const = default;
};

std::vector<TraceRow> trace_rows(const RunResult& run);
std::string emit_trace(const std::vector<TraceRow>& rows);
std::vector<TraceRow> parse_trace(const std::string& text);

// Everything needed to run one replication of a configured experiment.
struct Experiment {
  ExperimentConfig config;
  ProtocolConfig protocol;
  SellerFactory make_seller;
  EnvironmentFactory make_environment;
  StrategyProfile profile;
  std::string expert_mode;
  std::uint64_t expert_count = 0;
  bool grid_overridden = false;
};

Experiment build_experiment(const ExperimentConfig& config);
// Replication r draws from SeedTree(seed).child("rep", r).
RunResult run_replication(const Experiment& experiment, std::size_t r);

std::string summary_json(const Experiment& experiment, const std::vector<RunResult>& runs);
std::string report_json(const VerifierReport& report);
std::string sketch_json(const Sketch& z);

// Reads a CSV of rows of numbers (comma or semicolon separated).
std::vector<Vector> read_number_rows(const std::filesystem::path& path);

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kCapExceeded = 3 };

struct SimulateOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::optional<std::string> mode;
  std::filesystem::path out_dir = ".";
};
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::string check;
  std::uint64_t seed = 1;
  std::map<std::string, double> params;
  std::filesystem::path out_dir = ".";
  bool write_file = false;
};
// Known ids: online-sketch (alias sketch), lazy-ogd, random-pricing, rev-stability,
// sketch-set, sparse-regret, incentive, envelope.
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);
std::vector<std::string> verifier_ids();

struct SketchOptions {
  std::filesystem::path weights;
  std::filesystem::path contexts;
  double epsilon = 0.25;
  std::optional<std::filesystem::path> output;
};
int cmd_sketch(const SketchOptions& options, std::ostream& out, std::ostream& err);

struct EnumerateOptions {
  std::size_t horizon = 1;
  double epsilon = 0.25;
  double grid_step = 0.0;
  std::int64_t max_multiplier = 0;
  std::size_t max_support = 0;
  std::uint64_t cap = 1000000;
  bool list = false;
};
int cmd_enumerate_experts(const EnumerateOptions& options, std::ostream& out, std::ostream& err);

// Default output directory: $OMR_OUT_DIR, else the current directory.
std::filesystem::path default_out_dir();

}  // namespace omr::cli
