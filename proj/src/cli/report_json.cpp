#include <sstream>

#include <json.hpp>

#include "omr/cli.hpp"

namespace omr::cli {

namespace {

using Json = nlohmann::ordered_json;

Json stats_json(const Stats& s) {
  Json j;
  j["mean"] = s.mean;
  j["standard_error"] = s.standard_error;
  j["n"] = s.n;
  return j;
}

Json config_json(const ExperimentConfig& c) {
  Json j = Json::object();
  std::istringstream in(emit_config(c));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

}  // namespace

std::string summary_json(const Experiment& e, const std::vector<RunResult>& runs) {
  Json j;
  j["config"] = config_json(e.config);
  Json modes;
  modes["seller"] = e.config.seller;
  modes["expert_mode"] = e.expert_count > 0 ? e.expert_mode : "none";
  modes["expert_count"] = e.expert_count;
  modes["grid_overridden"] = e.grid_overridden;
  modes["opt_mode"] = e.config.opt_mode;
  j["modes"] = modes;
  j["replications"] = runs.size();

  std::vector<double> rev, opt_t, opt_b, reg;
  double err_t = 0.0, err_b = 0.0;
  bool have_opt = e.protocol.oracle.has_value();
  for (const auto& r : runs) {
    rev.push_back(r.revenue);
    if (have_opt) {
      opt_t.push_back(r.opt_truth->value);
      opt_b.push_back(r.opt_bids->value);
      reg.push_back(r.opt_truth->value - r.revenue);
      err_t += r.opt_truth->error_bound;
      err_b += r.opt_bids->error_bound;
    }
  }
  const double n = static_cast<double>(runs.size());
  j["revenue"] = stats_json(summarize(rev));
  if (have_opt) {
    Json ot = stats_json(summarize(opt_t));
    ot["error_bound"] = err_t / n;
    j["opt_truth"] = ot;
    Json ob = stats_json(summarize(opt_b));
    ob["error_bound"] = err_b / n;
    j["opt_bids"] = ob;
    bool truthful = std::all_of(e.profile.begin(), e.profile.end(),
                                [](const auto& s) { return s->name() == "truthful"; });
    Json rg = stats_json(summarize(reg));
    rg["opt_error_bound"] = err_t / n;
    // Without an equilibrium check, a non-truthful profile gives only a realized gap.
    rg["kind"] = truthful ? "truthful regret" : "realized gap under the configured strategies";
    j["regret"] = rg;
  } else {
    j["opt_truth"] = nullptr;
    j["opt_bids"] = nullptr;
    j["regret"] = nullptr;
  }
  Json utilities = Json::array();
  for (int i = 0; i < e.protocol.partition.buyers(); ++i) {
    std::vector<double> u;
    for (const auto& r : runs) u.push_back(r.utilities[static_cast<std::size_t>(i)]);
    Json b = stats_json(summarize(u));
    b["buyer"] = i + 1;
    b["strategy"] = e.profile[static_cast<std::size_t>(i)]->name();
    utilities.push_back(b);
  }
  j["utilities"] = utilities;
  j["seller"] = runs.empty() ? Json::object() : Json(runs.front().metadata);
  j["verifiers"] = Json::array();
  return j.dump(2) + "\n";
}

std::string report_json(const VerifierReport& r) {
  Json j;
  j["name"] = r.name;
  j["seed"] = r.seed;
  j["pass"] = r.pass;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json e;
    e["name"] = c.name;
    e["measured"] = c.measured;
    e["bound"] = c.bound;
    e["margin"] = c.margin;
    e["pass"] = c.pass;
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["details"] = r.details;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::string sketch_json(const Sketch& z) {
  Json j;
  j["epsilon"] = z.epsilon;
  j["grid_step"] = z.step;
  j["support"] = z.support;
  j["multipliers"] = z.multipliers;
  j["updates"] = update_count(z);
  return j.dump(2) + "\n";
}

}  // namespace omr::cli
