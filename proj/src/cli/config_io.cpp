#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "omr/cli.hpp"

namespace omr::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string shortest(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(key + ": expected a nonnegative integer, got '" + s + "'");
  return v;
}

double parse_number(const std::string& key, const std::string& s) {
  try {
    return parse_double(s);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
}

std::vector<double> parse_numbers(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_number(key, item));
  return out;
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + shortest(xs[i]);
  return out;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> read;
  std::function<std::string(const ExperimentConfig&)> write;
};

using FieldTable = std::vector<std::pair<std::string, Field>>;

const FieldTable& fields() {
  static const FieldTable table = [] {
    FieldTable t;
    auto size_field = [&t](const std::string& key, std::size_t ExperimentConfig::*m) {
      t.push_back({key,
                   {[key, m](ExperimentConfig& c, const std::string& v) { c.*m = parse_unsigned(key, v); },
                    [m](const ExperimentConfig& c) { return std::to_string(c.*m); }}});
    };
    auto double_field = [&t](const std::string& key, double ExperimentConfig::*m) {
      t.push_back({key,
                   {[key, m](ExperimentConfig& c, const std::string& v) { c.*m = parse_number(key, v); },
                    [m](const ExperimentConfig& c) { return shortest(c.*m); }}});
    };
    auto string_field = [&t](const std::string& key, std::string ExperimentConfig::*m) {
      t.push_back({key, {[m](ExperimentConfig& c, const std::string& v) { c.*m = v; },
                         [m](const ExperimentConfig& c) { return c.*m; }}});
    };
    size_field("horizon", &ExperimentConfig::horizon);
    size_field("dimension", &ExperimentConfig::dimension);
    double_field("epsilon", &ExperimentConfig::epsilon);
    double_field("gamma_bar", &ExperimentConfig::gamma_bar);
    t.push_back({"gammas",
                 {[](ExperimentConfig& c, const std::string& v) { c.gammas = parse_numbers("gammas", v); },
                  [](const ExperimentConfig& c) { return join_numbers(c.gammas); }}});
    t.push_back({"buyers",
                 {[](ExperimentConfig& c, const std::string& v) {
                    auto n = parse_unsigned("buyers", v);
                    if (n > 1000000) throw ConfigError("buyers: too many");
                    c.buyers = static_cast<int>(n);
                  },
                  [](const ExperimentConfig& c) { return std::to_string(c.buyers); }}});
    string_field("partition", &ExperimentConfig::partition);
    string_field("environment", &ExperimentConfig::environment);
    string_field("environment_file", &ExperimentConfig::environment_file);
    string_field("seller", &ExperimentConfig::seller);
    t.push_back({"fixed_weight",
                 {[](ExperimentConfig& c, const std::string& v) {
                    c.fixed_weight = parse_numbers("fixed_weight", v);
                  },
                  [](const ExperimentConfig& c) { return join_numbers(c.fixed_weight); }}});
    t.push_back({"buyer_strategies",
                 {[](ExperimentConfig& c, const std::string& v) { c.buyer_strategies = split(v, ','); },
                  [](const ExperimentConfig& c) {
                    std::string out;
                    for (std::size_t i = 0; i < c.buyer_strategies.size(); ++i)
                      out += (i ? "," : "") + c.buyer_strategies[i];
                    return out;
                  }}});
    t.push_back({"seed",
                 {[](ExperimentConfig& c, const std::string& v) { c.seed = parse_unsigned("seed", v); },
                  [](const ExperimentConfig& c) { return std::to_string(c.seed); }}});
    size_field("replications", &ExperimentConfig::replications);
    string_field("expert_mode", &ExperimentConfig::expert_mode);
    double_field("expert_grid_step", &ExperimentConfig::expert_grid_step);
    t.push_back({"expert_max_multiplier",
                 {[](ExperimentConfig& c, const std::string& v) {
                    c.expert_max_multiplier =
                        static_cast<std::int64_t>(parse_unsigned("expert_max_multiplier", v));
                  },
                  [](const ExperimentConfig& c) { return std::to_string(c.expert_max_multiplier); }}});
    size_field("expert_max_support", &ExperimentConfig::expert_max_support);
    t.push_back({"expert_cap",
                 {[](ExperimentConfig& c, const std::string& v) { c.expert_cap = parse_unsigned("expert_cap", v); },
                  [](const ExperimentConfig& c) { return std::to_string(c.expert_cap); }}});
    size_field("expert_pool", &ExperimentConfig::expert_pool);
    string_field("opt_mode", &ExperimentConfig::opt_mode);
    double_field("opt_grid_resolution", &ExperimentConfig::opt_grid_resolution);
    double_field("tolerance", &ExperimentConfig::tolerance);
    t.push_back({"rho_override",
                 {[](ExperimentConfig& c, const std::string& v) {
                    if (v.empty() || v == "none")
                      c.rho_override.reset();
                    else
                      c.rho_override = parse_number("rho_override", v);
                  },
                  [](const ExperimentConfig& c) {
                    return c.rho_override ? shortest(*c.rho_override) : std::string("none");
                  }}});
    string_field("trace_file", &ExperimentConfig::trace_file);
    string_field("summary_file", &ExperimentConfig::summary_file);
    return t;
  }();
  return table;
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::map<std::string, const Field*> index;
  for (const auto& [k, f] : fields()) index[k] = &f;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (seen.count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = lineno;
    it->second->read(c, value);
  }
  validate(c);
  return c;
}

std::string emit_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.write(c) + "\n";
  return out;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.horizon == 0) fail("horizon must be positive");
  if (c.dimension == 0) fail("dimension must be positive");
  if (!(c.epsilon > 0.0 && c.epsilon <= 0.5)) fail("epsilon must lie in (0, 1/2]");
  if (c.seller == "sum" && c.epsilon > 0.25) fail("the sum seller needs epsilon <= 1/4");
  if (!(c.gamma_bar >= 0.0 && c.gamma_bar < 1.0)) fail("gamma_bar must lie in [0, 1)");
  if (c.buyers < 1) fail("need at least one buyer");
  if (!c.gammas.empty() && c.gammas.size() != static_cast<std::size_t>(c.buyers))
    fail("gammas needs one entry per buyer");
  for (double g : c.gammas)
    if (!(g >= 0.0 && g <= c.gamma_bar)) fail("every gamma must lie in [0, gamma_bar]");
  if (!one_of(c.partition, {"single", "round-robin", "blocks"})) fail("unknown partition '" + c.partition + "'");
  if (c.partition == "single" && c.buyers != 1) fail("partition single needs exactly one buyer");
  if (static_cast<std::size_t>(c.buyers) > c.horizon) fail("more buyers than rounds");
  if (!one_of(c.environment, {"iid", "tracker", "rotation", "fixed"}))
    fail("unknown environment '" + c.environment + "'");
  if (c.environment == "fixed" && c.environment_file.empty()) fail("environment fixed needs environment_file");
  if (c.environment == "rotation" && c.dimension < 2) fail("environment rotation needs dimension >= 2");
  if (!one_of(c.seller, {"omr", "sum", "copy", "fixed"})) fail("unknown seller '" + c.seller + "'");
  if (c.seller == "fixed") {
    if (c.fixed_weight.size() != c.dimension) fail("fixed_weight needs one entry per dimension");
    double n = 0.0;
    for (double x : c.fixed_weight) n += x * x;
    if (std::sqrt(n) > 1.0 + 1e-9) fail("fixed_weight must lie in the unit ball");
  }
  if (!c.buyer_strategies.empty() && c.buyer_strategies.size() != static_cast<std::size_t>(c.buyers))
    fail("buyer_strategies needs one entry per buyer");
  if (c.replications == 0) fail("replications must be positive");
  if (!one_of(c.expert_mode, {"exact", "sampled"})) fail("expert_mode must be exact or sampled");
  if (c.expert_grid_step < 0.0) fail("expert_grid_step must be nonnegative");
  if (c.expert_max_multiplier < 0) fail("expert_max_multiplier must be nonnegative");
  if (c.expert_pool == 0) fail("expert_pool must be positive");
  if (!one_of(c.opt_mode, {"grid", "sketch", "none"})) fail("opt_mode must be grid, sketch or none");
  if (!(c.opt_grid_resolution > 0.0 && c.opt_grid_resolution <= 1.0))
    fail("opt_grid_resolution must lie in (0, 1]");
  if (!(c.tolerance >= 0.0 && c.tolerance < 1e-3)) fail("tolerance must lie in [0, 1e-3)");
  if (c.rho_override && !(*c.rho_override >= 0.0 && *c.rho_override <= 1.0))
    fail("rho_override must lie in [0, 1]");
  if (c.trace_file.empty() || c.summary_file.empty()) fail("output file names must be nonempty");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<Vector> read_number_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<Vector> rows;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ';', ',');
    line = trim(line);
    if (line.empty()) continue;
    Vector row;
    for (const auto& item : split(line, ',')) row.push_back(parse_number(path.filename().string(), item));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::filesystem::path default_out_dir() {
  const char* env = std::getenv("OMR_OUT_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path(".");
}

}  // namespace omr::cli
