#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include <json.hpp>

#include "omr/cli.hpp"

namespace omr::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

// Parameter lookup that rejects keys the verifier does not know.
class Params {
 public:
  Params(const std::map<std::string, double>& given, std::map<std::string, double> defaults)
      : values_(std::move(defaults)) {
    for (const auto& [k, v] : given) {
      if (!values_.count(k)) throw ConfigError("unknown parameter '" + k + "'");
      values_[k] = v;
    }
  }
  double get(const std::string& k) const { return values_.at(k); }
  std::size_t count(const std::string& k) const {
    double v = get(k);
    if (v < 0.0 || v != std::floor(v)) throw ConfigError(k + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

 private:
  std::map<std::string, double> values_;
};

using Verifier = std::function<VerifierReport(const std::map<std::string, double>&, std::uint64_t)>;

const std::map<std::string, Verifier>& verifiers() {
  static const std::map<std::string, Verifier> table = {
      {"online-sketch",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"trials", 100}, {"horizon", 500}, {"d", 20}, {"epsilon", 0.3}});
         if (!(p.get("epsilon") > 0.0 && p.get("epsilon") <= 0.5)) throw ConfigError("epsilon must lie in (0, 1/2]");
         return verify_online_sketch(p.count("trials"), p.count("horizon"), p.count("d"), p.get("epsilon"), seed);
       }},
      {"lazy-ogd",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"trials", 6}, {"rounds", 1000}, {"beta", 0.02}, {"grid_spacing", 0.01}});
         if (!(p.get("beta") > 0.0)) throw ConfigError("beta must be positive");
         return verify_lazy_ogd(p.count("trials"), p.count("rounds"), p.get("beta"), seed, p.get("grid_spacing"));
       }},
      {"random-pricing",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"theta", 0.8}, {"bid", 0.5}, {"samples", 1000000}});
         for (const char* k : {"theta", "bid"})
           if (!(p.get(k) >= 0.0 && p.get(k) <= 1.0)) throw ConfigError(std::string(k) + " must lie in [0, 1]");
         if (p.count("samples") < 2) throw ConfigError("need at least two samples");
         return verify_random_pricing(p.get("theta"), p.get("bid"), p.count("samples"), seed);
       }},
      {"rev-stability",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"trials", 50}, {"horizon", 50}, {"delta", 0.04}, {"d", 2}});
         if (!(p.get("delta") >= 0.0 && p.get("delta") <= 0.25)) throw ConfigError("delta must lie in [0, 1/4]");
         if (p.count("d") < 1 || p.count("d") > 2) throw ConfigError("d must be 1 or 2");
         return verify_rev_stability(p.count("trials"), p.count("horizon"), p.get("delta"), seed, p.count("d"));
       }},
      {"sketch-set",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"trials", 20}, {"horizon", 4}, {"epsilon", 0.1}, {"grid_step", 0.25},
                          {"max_multiplier", 8}, {"max_support", 4}, {"d", 2}, {"cap", 2000000}});
         if (p.count("d") < 1 || p.count("d") > 2) throw ConfigError("d must be 1 or 2");
         auto grid = SketchGrid::custom(p.get("grid_step"), static_cast<std::int64_t>(p.count("max_multiplier")),
                                        p.count("max_support"));
         return verify_sketch_set_sufficiency(p.count("trials"), p.count("horizon"), p.get("epsilon"), grid,
                                              seed, p.count("d"), p.count("cap"));
       }},
      {"sparse-regret",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"rho", 0.1}, {"experts", 8}, {"horizon", 512}, {"replications", 200}});
         if (!(p.get("rho") > 0.0 && p.get("rho") <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
         if (p.count("experts") < 2) throw ConfigError("need at least two experts");
         return verify_sparse_regret(p.get("rho"), p.count("experts"), p.count("horizon"), p.count("replications"),
                                     seed);
       }},
      {"incentive",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"horizon", 2}, {"gamma", 0.5}, {"epsilon", 0.25}, {"grid_cells", 4},
                          {"rho", -1.0}, {"value", 0.75}});
         IncentiveOptions o;
         o.horizon = p.count("horizon");
         if (o.horizon < 1 || o.horizon > 3) throw ConfigError("horizon must be 1, 2 or 3");
         o.gamma = p.get("gamma");
         if (!(o.gamma > 0.0 && o.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
         o.epsilon = p.get("epsilon");
         if (!(o.epsilon > 0.0 && o.epsilon <= 0.25)) throw ConfigError("epsilon must lie in (0, 1/4]");
         o.grid_cells = p.count("grid_cells");
         if (o.grid_cells < 1 || o.grid_cells > 8) throw ConfigError("grid_cells must lie in [1, 8]");
         if (p.get("rho") >= 0.0) o.rho_override = p.get("rho");
         o.values.assign(o.horizon, p.get("value"));
         return verify_truthfulness_incentive(o, seed);
       }},
      {"envelope",
       [](const auto& given, std::uint64_t seed) {
         Params p(given, {{"horizon", 2048}, {"replications", 100}, {"d", 2}, {"epsilon", 0.1},
                          {"grid_step", 0.25}, {"max_multiplier", 4}, {"max_support", 1},
                          {"oracle_resolution", 2e-3}});
         EnvelopeOptions o;
         o.horizon = p.count("horizon");
         o.replications = p.count("replications");
         o.d = p.count("d");
         if (o.d < 1 || o.d > 3) throw ConfigError("d must lie in [1, 3]");
         o.epsilon = p.get("epsilon");
         o.grid_step = p.get("grid_step");
         o.max_multiplier = static_cast<std::int64_t>(p.count("max_multiplier"));
         o.max_support = p.count("max_support");
         o.oracle_resolution = p.get("oracle_resolution");
         if (o.d < 2) o.environments = {"iid", "tracker", "fixed"};
         return verify_regret_envelope(o, seed);
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> verifier_ids() {
  std::vector<std::string> ids;
  for (const auto& [k, v] : verifiers()) ids.push_back(k);
  return ids;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  Experiment e;
  try {
    ExperimentConfig c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.replications) c.replications = *o.replications;
    if (o.mode) c.expert_mode = *o.mode;
    validate(c);
    e = build_experiment(c);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const CapExceeded& ex) {
    err << "cap exceeded: " << ex.what() << " needs " << ex.required() << ", cap " << ex.cap() << "\n";
    return kCapExceeded;
  } catch (const std::invalid_argument& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  }

  std::vector<RunResult> runs;
  try {
    for (std::size_t r = 0; r < e.config.replications; ++r) runs.push_back(run_replication(e, r));
  } catch (const CapExceeded& ex) {
    err << "cap exceeded: " << ex.what() << " needs " << ex.required() << ", cap " << ex.cap() << "\n";
    return kCapExceeded;
  }
  write_file(o.out_dir / e.config.trace_file, emit_trace(trace_rows(runs.front())));
  write_file(o.out_dir / e.config.summary_file, summary_json(e, runs));
  std::vector<double> revenues;
  for (const auto& r : runs) revenues.push_back(r.revenue);
  Stats rev = summarize(revenues);
  out << "revenue " << format_double(rev.mean) << " (se " << format_double(rev.standard_error) << ") over "
      << runs.size() << " replication(s)\n";
  out << "wrote " << (o.out_dir / e.config.trace_file).string() << " and "
      << (o.out_dir / e.config.summary_file).string() << "\n";
  return kOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  std::string id = o.check == "sketch" ? "online-sketch" : o.check;
  auto it = verifiers().find(id);
  if (it == verifiers().end()) {
    err << "unknown verifier '" << o.check << "'; known:";
    for (const auto& k : verifier_ids()) err << " " << k;
    err << "\n";
    return kConfigError;
  }
  VerifierReport report;
  try {
    report = it->second(o.params, o.seed);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const CapExceeded& ex) {
    err << "cap exceeded: " << ex.what() << " needs " << ex.required() << ", cap " << ex.cap() << "\n";
    return kCapExceeded;
  } catch (const std::invalid_argument& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  }
  std::string text = report_json(report);
  out << text;
  if (o.write_file) write_file(o.out_dir / (id + ".json"), text);
  return report.pass ? kOk : kVerifyFailed;
}

int cmd_sketch(const SketchOptions& o, std::ostream& out, std::ostream& err) {
  Sketch z;
  try {
    auto w_rows = read_number_rows(o.weights);
    if (w_rows.size() != 1) throw ConfigError("weights file must hold exactly one row");
    auto x_rows = read_number_rows(o.contexts);
    if (!(o.epsilon > 0.0 && o.epsilon <= 0.5)) throw ConfigError("epsilon must lie in (0, 1/2]");
    const std::size_t d = w_rows[0].size();
    std::vector<ContextVector> xs;
    for (std::size_t t = 0; t < x_rows.size(); ++t) {
      if (x_rows[t].size() != d)
        throw ConfigError("context row " + std::to_string(t + 1) + " has dimension " +
                          std::to_string(x_rows[t].size()) + ", weights have " + std::to_string(d));
      xs.push_back(ContextVector::make(x_rows[t], 1e-9));
    }
    z = construct_sketch(WeightVector::make(w_rows[0], 1e-9), xs, o.epsilon);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  }
  std::string text = sketch_json(z);
  if (o.output)
    write_file(*o.output, text);
  else
    out << text;
  return kOk;
}

int cmd_enumerate_experts(const EnumerateOptions& o, std::ostream& out, std::ostream& err) {
  nlohmann::ordered_json j;
  try {
    if (o.horizon == 0) throw ConfigError("horizon must be positive");
    if (!(o.epsilon > 0.0 && o.epsilon <= 0.5)) throw ConfigError("epsilon must lie in (0, 1/2]");
    SketchGrid grid = SketchGrid::for_epsilon(o.epsilon);
    if (o.grid_step > 0.0 || o.max_multiplier > 0 || o.max_support > 0) {
      double step = o.grid_step > 0.0 ? o.grid_step : grid.step;
      std::int64_t m = o.max_multiplier > 0 ? o.max_multiplier
                                            : static_cast<std::int64_t>(std::floor(2.0 / step + 1e-9));
      grid = SketchGrid::custom(step, m, o.max_support > 0 ? o.max_support : grid.max_support);
    }
    auto count = count_sketch_set(o.horizon, grid);
    j["horizon"] = o.horizon;
    j["epsilon"] = o.epsilon;
    j["grid_step"] = grid.step;
    j["max_multiplier"] = grid.max_multiplier;
    j["max_support"] = grid.max_support;
    j["grid_overridden"] = grid.overridden;
    if (count)
      j["count"] = *count;
    else
      j["count"] = "overflow";
    if (o.list) {
      auto sketches = enumerate_sketch_set(o.horizon, o.epsilon, grid, o.cap);
      auto& arr = j["sketches"] = nlohmann::ordered_json::array();
      for (const auto& z : sketches) arr.push_back({{"support", z.support}, {"multipliers", z.multipliers}});
    }
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const CapExceeded& ex) {
    err << "cap exceeded: " << ex.what() << " needs " << ex.required() << ", cap " << ex.cap() << "\n";
    return kCapExceeded;
  } catch (const std::invalid_argument& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  }
  out << j.dump(2) << "\n";
  return kOk;
}

}  // namespace omr::cli
