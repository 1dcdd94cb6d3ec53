#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omr/agents.hpp"
#include "omr/core.hpp"
#include "omr/environment.hpp"
#include "omr/opt.hpp"
#include "omr/rng.hpp"

namespace omr {

struct ProtocolConfig {
  RoundPartition partition = RoundPartition::single(1);
  DiscountProfile discount = DiscountProfile::uniform(1, 0.0);
  std::optional<OptOracleConfig> oracle;
  double tol = kDefaultTolerance;

  std::size_t horizon() const { return partition.horizon(); }
};

struct RunResult {
  std::vector<RoundTrace> rounds;
  double revenue = 0.0;
  std::optional<OptEstimate> opt_truth;
  std::optional<OptEstimate> opt_bids;
  std::vector<double> utilities;  // indexed by buyer - 1
  Metadata metadata;
};

// Plays T rounds of the posted-price protocol. The profile is cloned, so the caller's
// strategies keep their state. `buyer_seeds` feeds one stream per buyer.
RunResult run_protocol(const ProtocolConfig& config, Seller& seller, const StrategyProfile& profile,
                       Environment& env, const SeedTree& buyer_seeds);

// Canonical JSON rendering, used for byte-identity checks and summaries.
std::string to_json(const RunResult& result);

struct Stats {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};
Stats summarize(std::span<const double> xs);

using SellerFactory = std::function<std::unique_ptr<Seller>(const SeedTree&)>;
using EnvironmentFactory = std::function<std::unique_ptr<Environment>(const SeedTree&)>;

struct RegretReport {
  Stats regret;
  Stats revenue;
  Stats opt;
  // Mean of the oracle's error bound: the true regret mean is at most regret.mean + this.
  double opt_error_bound = 0.0;
  std::vector<double> per_replication;
  std::vector<RunResult> runs;  // kept only when requested
};

// Truthful buyers, `replications` independent runs. Replication r uses seeds.child("rep", r),
// so results do not depend on the number of worker threads.
RegretReport regret(const ProtocolConfig& config, const SellerFactory& make_seller,
                    const EnvironmentFactory& make_env, std::size_t replications,
                    const SeedTree& seeds, std::size_t threads = 1, bool keep_runs = false);

// A game whose randomness is a finite list of weighted scenarios. Each scenario fixes the
// seller's and environment's coins, so expectations are weighted sums.
struct Scenario {
  double weight = 1.0;
  SeedTree seeds{0};
  std::optional<SellerCoinScript> coins;
};

struct GameInstance {
  ProtocolConfig config;
  std::function<std::unique_ptr<Seller>(const Scenario&)> make_seller;
  std::function<std::unique_ptr<Environment>(const Scenario&)> make_environment;
  std::vector<Scenario> scenarios;
  // True when the scenario weights are exact probabilities; false for sampled replications.
  bool exact = true;
};

// Runs every scenario with the given profile.
std::vector<RunResult> play(const GameInstance& game, const StrategyProfile& profile);
double expected_utility(const GameInstance& game, const StrategyProfile& profile, int buyer);

// Scenario list for the sum seller with omega ~ Ber(p_omega), lambda uniform over `lambdas`
// and xi ~ Ber(rho), enumerated over all rounds.
std::vector<Scenario> enumerate_sum_scenarios(std::size_t horizon, double p_omega,
                                              std::span<const double> lambdas, double rho);
// Midpoints (k + 1/2) / cells, k = 0..cells-1.
std::vector<double> midpoint_grid(std::size_t cells);
std::vector<Scenario> seeded_scenarios(std::size_t count, const SeedTree& seeds);

struct ProfileCandidate {
  std::string name;
  std::function<StrategyProfile()> make;
};

struct DeviationBudget {
  std::vector<double> bid_grid;
  std::size_t node_cap = 200000;
  double epsilon_nash = 1e-6;
};

struct ProfileOutcome {
  std::string name;
  double opt_minus_revenue = 0.0;
  double standard_error = 0.0;
  bool passed = false;
  double max_deviation_gain = 0.0;
  double tolerance = 0.0;
};

struct SRegEstimate {
  // Largest Opt - Rev over profiles that pass the deviation check. A lower-bound estimate of
  // strategic regret: the check only covers deviations on the finite bid grid.
  double value = 0.0;
  bool any_passed = false;
  std::vector<ProfileOutcome> profiles;
  std::string label = "lower-bound estimate";
};

SRegEstimate sreg_estimate(const GameInstance& game, std::span<const ProfileCandidate> pool,
                           const DeviationBudget& budget);

}  // namespace omr
