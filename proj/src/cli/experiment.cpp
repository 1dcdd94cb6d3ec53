#include <cmath>
#include <memory>

#include "omr/cli.hpp"
#include "omr/environment.hpp"
#include "omr/sketch.hpp"

namespace omr::cli {

namespace {

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(':', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::unique_ptr<BuyerStrategy> make_strategy(const std::string& spec) {
  auto parts = split_colon(spec);
  auto arg = [&](std::size_t i) {
    if (i >= parts.size()) throw ConfigError("buyer strategy '" + spec + "' is missing an argument");
    try {
      return parse_double(parts[i]);
    } catch (const std::exception&) {
      throw ConfigError("buyer strategy '" + spec + "' has a bad argument");
    }
  };
  const std::string& kind = parts[0];
  std::size_t expected = 0;
  std::unique_ptr<BuyerStrategy> s;
  if (kind == "truthful") {
    s = std::make_unique<TruthfulBuyer>();
  } else if (kind == "shade") {
    expected = 1;
    s = std::make_unique<ShadeBuyer>(arg(1));
  } else if (kind == "noisy") {
    expected = 1;
    s = std::make_unique<NoisyBuyer>(arg(1));
  } else if (kind == "deceiver") {
    expected = 2;
    double rounds = arg(1);
    if (rounds < 0.0 || rounds != std::floor(rounds)) throw ConfigError("deceiver rounds must be an integer");
    s = std::make_unique<ThresholdDeceiver>(static_cast<std::size_t>(rounds), arg(2));
  } else {
    throw ConfigError("unknown buyer strategy '" + spec + "'");
  }
  if (parts.size() != expected + 1) throw ConfigError("buyer strategy '" + spec + "' has extra arguments");
  return s;
}

SketchGrid expert_grid(const ExperimentConfig& c) {
  if (c.expert_grid_step == 0.0 && c.expert_max_multiplier == 0 && c.expert_max_support == 0)
    return SketchGrid::for_epsilon(c.epsilon);
  SketchGrid base = SketchGrid::for_epsilon(c.epsilon);
  double step = c.expert_grid_step > 0.0 ? c.expert_grid_step : base.step;
  std::int64_t m = c.expert_max_multiplier > 0 ? c.expert_max_multiplier
                                               : static_cast<std::int64_t>(std::floor(2.0 / step + 1e-9));
  std::size_t support = c.expert_max_support > 0 ? c.expert_max_support : base.max_support;
  return SketchGrid::custom(step, m, support);
}

std::vector<FixedRound> read_fixed_environment(const ExperimentConfig& c) {
  auto rows = read_number_rows(c.environment_file);
  if (rows.size() < c.horizon) throw ConfigError("environment_file has fewer rows than the horizon");
  std::vector<FixedRound> seq;
  for (std::size_t t = 0; t < c.horizon; ++t) {
    if (rows[t].size() != c.dimension + 1)
      throw ConfigError("environment_file row " + std::to_string(t + 1) + " needs dimension + 1 numbers");
    double v = rows[t].back();
    rows[t].pop_back();
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("environment_file values must lie in [0, 1]");
    double n = 0.0;
    for (double x : rows[t]) n += x * x;
    if (std::abs(std::sqrt(n) - 1.0) > 1e-6)
      throw ConfigError("environment_file row " + std::to_string(t + 1) + " has a non-unit context");
    seq.push_back({ContextVector::normalized(rows[t]).coords(), v});
  }
  return seq;
}

}  // namespace

Experiment build_experiment(const ExperimentConfig& config) {
  validate(config);
  Experiment e;
  e.config = config;
  const auto& c = e.config;
  const std::size_t T = c.horizon;

  if (c.partition == "single")
    e.protocol.partition = RoundPartition::single(T);
  else if (c.partition == "round-robin")
    e.protocol.partition = RoundPartition::round_robin(T, c.buyers);
  else
    e.protocol.partition = RoundPartition::blocks(T, c.buyers);
  e.protocol.discount = c.gammas.empty() ? DiscountProfile::uniform(c.buyers, c.gamma_bar)
                                         : DiscountProfile::make(c.gammas, c.gamma_bar);
  e.protocol.tol = c.tolerance;

  for (int i = 0; i < c.buyers; ++i)
    e.profile.push_back(c.buyer_strategies.empty() ? std::make_unique<TruthfulBuyer>()
                                                   : make_strategy(c.buyer_strategies[i]));

  // Expert set. Only the learning sellers need one.
  auto sketches = std::make_shared<std::vector<Sketch>>();
  auto references = std::make_shared<std::vector<Vector>>();
  const bool learning = c.seller == "omr" || c.seller == "sum";
  const SketchGrid grid = expert_grid(c);
  e.grid_overridden = grid.overridden;
  e.expert_mode = c.expert_mode;
  if (learning || c.opt_mode == "sketch") {
    if (c.expert_mode == "exact") {
      auto count = count_sketch_set(T, grid);
      if (!count || *count > c.expert_cap)
        throw CapExceeded("sketch set size", count.value_or(UINT64_MAX), c.expert_cap);
      *sketches = enumerate_sketch_set(T, c.epsilon, grid, c.expert_cap);
      e.expert_count = sketches->size();
    } else {
      Rng rng = SeedTree(c.seed).child("expert-pool").rng();
      references->push_back(Vector(c.dimension, 0.0));
      while (references->size() < c.expert_pool) references->push_back(random_in_ball(rng, c.dimension));
      e.expert_count = references->size();
    }
  }

  if (c.opt_mode == "grid") {
    OptOracleConfig o;
    o.resolution = c.opt_grid_resolution;
    o.tol = c.tolerance;
    e.protocol.oracle = o;
  } else if (c.opt_mode == "sketch") {
    if (c.expert_mode != "exact") throw ConfigError("opt_mode sketch needs expert_mode exact");
    OptOracleConfig o;
    o.mode = OptMode::SketchSetSup;
    o.sketches = *sketches;
    o.epsilon = c.epsilon;
    o.tol = c.tolerance;
    e.protocol.oracle = o;
  }

  const std::size_t d = c.dimension;
  auto make_bank = [sketches, references, d, c]() -> std::unique_ptr<ExpertBank> {
    if (c.expert_mode == "exact") return std::make_unique<SketchSetBank>(*sketches, d);
    return std::make_unique<OnlineSketchBank>(*references, c.epsilon);
  };
  const std::size_t K = static_cast<std::size_t>(e.expert_count);
  if (c.seller == "omr") {
    e.make_seller = [make_bank, K, c](const SeedTree& s) -> std::unique_ptr<Seller> {
      return std::make_unique<SellerOmr>(make_bank(), std::make_unique<Hedge>(K, c.horizon),
                                         std::make_unique<SeededSellerCoins>(s), c.tolerance);
    };
  } else if (c.seller == "sum") {
    SumParams params;
    params.epsilon = c.epsilon;
    params.gamma_bar = c.gamma_bar;
    params.horizon = T;
    params.rho_override = c.rho_override;
    e.make_seller = [make_bank, K, c, params](const SeedTree& s) -> std::unique_ptr<Seller> {
      return std::make_unique<SellerSum>(make_bank(), std::make_unique<Hedge>(K, SellerSum::inner_horizon(params)),
                                         params, std::make_unique<SeededSellerCoins>(s), c.tolerance);
    };
  } else if (c.seller == "copy") {
    e.make_seller = [](const SeedTree&) -> std::unique_ptr<Seller> { return std::make_unique<CopyBidSeller>(1.0); };
  } else {
    auto w = WeightVector::make(c.fixed_weight, 1e-9);
    e.make_seller = [w](const SeedTree&) -> std::unique_ptr<Seller> { return std::make_unique<FixedWeightSeller>(w); };
  }

  if (c.environment == "iid") {
    e.make_environment = [d](const SeedTree& s) {
      Rng setup = s.child("model").rng();
      Vector w = random_unit_vector(setup, d);
      for (double& x : w) x *= 0.7;
      return env_iid(d, contexts::uniform_sphere(d), values::linear_noisy(w, 0.2), s);
    };
  } else if (c.environment == "tracker") {
    e.make_environment = [d](const SeedTree& s) { return env_adaptive_tracker(d, s); };
  } else if (c.environment == "rotation") {
    e.make_environment = [d](const SeedTree& s) { return env_context_rotation(d, 64, s); };
  } else {
    auto seq = read_fixed_environment(c);
    e.make_environment = [seq](const SeedTree&) { return env_fixed(seq, 1e-9); };
  }
  return e;
}

RunResult run_replication(const Experiment& e, std::size_t r) {
  SeedTree rs = SeedTree(e.config.seed).child("rep", r);
  auto seller = e.make_seller(rs.child("seller"));
  auto env = e.make_environment(rs.child("environment"));
  return run_protocol(e.protocol, *seller, e.profile, *env, rs.child("buyers"));
}

}  // namespace omr::cli
