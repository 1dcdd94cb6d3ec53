#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omr/core.hpp"
#include "omr/experts.hpp"
#include "omr/rng.hpp"
#include "omr/sketch.hpp"

namespace omr {

// rho = min{1, (1 - gamma_bar) eps^5 / (3 gamma_bar)}; 1 when gamma_bar = 0.
double compute_rho(double epsilon, double gamma_bar);
// delta = sqrt(3 rho gamma_bar / (eps (1 - gamma_bar))); 0 when gamma_bar = 0.
double compute_delta(double epsilon, double gamma_bar, double rho);

using Metadata = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------------------------
// Seller side

// Private randomness of a seller.
class SellerCoins {
 public:
  virtual ~SellerCoins() = default;
  virtual double expert_uniform() = 0;
  virtual bool omega(double p) = 0;
  virtual double lambda() = 0;
  virtual std::vector<bool> xi_sequence(std::size_t horizon, double rho) = 0;
};

class SeededSellerCoins final : public SellerCoins {
 public:
  explicit SeededSellerCoins(const SeedTree& seeds);
  double expert_uniform() override { return uniform01(expert_); }
  bool omega(double p) override { return bernoulli(omega_, p); }
  double lambda() override { return uniform01(lambda_); }
  std::vector<bool> xi_sequence(std::size_t horizon, double rho) override;

 private:
  Rng expert_, omega_, lambda_, xi_;
};

// Fixed coin outcomes, one entry per round. Used to take exact expectations over a finite
// coin space.
struct SellerCoinScript {
  std::vector<bool> omega;
  std::vector<double> lambda;
  std::vector<bool> xi;
  std::vector<double> expert_uniform;
};

class ScriptedSellerCoins final : public SellerCoins {
 public:
  explicit ScriptedSellerCoins(SellerCoinScript script) : script_(std::move(script)) {}
  double expert_uniform() override;
  bool omega(double p) override;
  double lambda() override;
  std::vector<bool> xi_sequence(std::size_t horizon, double rho) override;

 private:
  SellerCoinScript script_;
  std::size_t expert_calls_ = 0, omega_calls_ = 0, lambda_calls_ = 0;
};

struct SellerRoundLog {
  int omega = -1;
  int xi = -1;
  double lambda = -1.0;
  long long expert = -1;
};

class Seller {
 public:
  virtual ~Seller() = default;
  // Posts w_t for context x_t.
  virtual WeightVector step(const ContextVector& x) = 0;
  // Receives b_t. Must follow exactly one step().
  virtual void feedback(const Bid& b) = 0;
  virtual SellerRoundLog last_log() const = 0;
  virtual std::string id() const = 0;
  virtual Metadata metadata() const { return {}; }
};

// Guards the step/feedback alternation shared by all sellers.
class SellerBase : public Seller {
 protected:
  void begin_step();
  void begin_feedback();
  std::size_t round() const { return round_; }

 private:
  std::size_t round_ = 0;
  bool awaiting_feedback_ = false;
};

// Samples an expert each round and feeds every expert its counterfactual revenue.
class SellerOmr final : public SellerBase {
 public:
  SellerOmr(std::unique_ptr<ExpertBank> bank, std::unique_ptr<ExpertAlgorithm> learner,
            std::unique_ptr<SellerCoins> coins, double tol = kDefaultTolerance);

  WeightVector step(const ContextVector& x) override;
  void feedback(const Bid& b) override;
  SellerRoundLog last_log() const override { return log_; }
  std::string id() const override { return "omr"; }
  Metadata metadata() const override;
  const ExpertAlgorithm& learner() const { return *learner_; }
  // Cumulative reward of each expert so far.
  const std::vector<double>& expert_totals() const { return totals_; }

 private:
  std::unique_ptr<ExpertBank> bank_;
  std::unique_ptr<ExpertAlgorithm> learner_;
  std::vector<double> totals_;
  std::unique_ptr<SellerCoins> coins_;
  double tol_;
  SellerRoundLog log_;
  std::vector<double> rewards_;
};

struct SumParams {
  double epsilon = 0.25;
  double gamma_bar = 0.5;
  std::size_t horizon = 1;
  std::optional<double> rho_override;
  // Probability of the random-pricing branch; defaults to epsilon.
  std::optional<double> random_pricing_override;

  double rho() const;
  double random_pricing_probability() const;
};

// Random pricing with probability eps, otherwise an expert sampled from a learner that only
// sees the rounds selected by the up-front coins xi.
class SellerSum final : public SellerBase {
 public:
  // `inner` is wrapped in a SparseExpert driven by coins->xi_sequence().
  SellerSum(std::unique_ptr<ExpertBank> bank, std::unique_ptr<ExpertAlgorithm> inner,
            SumParams params, std::unique_ptr<SellerCoins> coins, double tol = kDefaultTolerance);

  WeightVector step(const ContextVector& x) override;
  void feedback(const Bid& b) override;
  SellerRoundLog last_log() const override { return log_; }
  std::string id() const override { return "sum"; }
  Metadata metadata() const override;
  double rho() const { return rho_; }
  double delta() const { return delta_; }

  // Horizon for the inner learner's tuning, max(1, ceil(rho T)).
  static std::size_t inner_horizon(const SumParams& params);

 private:
  std::unique_ptr<ExpertBank> bank_;
  std::unique_ptr<SparseExpert> learner_;
  SumParams params_;
  std::unique_ptr<SellerCoins> coins_;
  double tol_;
  double rho_;
  double delta_;
  SellerRoundLog log_;
  std::vector<double> rewards_;
};

// Naive control: posts last round's bid as this round's price.
class CopyBidSeller final : public SellerBase {
 public:
  explicit CopyBidSeller(double initial_price = 1.0);
  WeightVector step(const ContextVector& x) override;
  void feedback(const Bid& b) override;
  SellerRoundLog last_log() const override { return {}; }
  std::string id() const override { return "copy-bid"; }

 private:
  double price_;
};

// Posts the same weight every round.
class FixedWeightSeller final : public SellerBase {
 public:
  explicit FixedWeightSeller(WeightVector w) : w_(std::move(w)) {}
  WeightVector step(const ContextVector& x) override;
  void feedback(const Bid& b) override;
  SellerRoundLog last_log() const override { return {}; }
  std::string id() const override { return "fixed"; }

 private:
  WeightVector w_;
};

// ---------------------------------------------------------------------------------------------
// Buyer side

// What everyone sees after a round.
struct PublicRound {
  std::size_t round = 0;
  int buyer = 0;
  ContextVector context = ContextVector::make({1.0});
  Vector weight;
  double price = 0.0;
  double value = 0.0;
};

// What only the bidding buyer sees after its own round.
struct OwnRound {
  std::size_t round = 0;
  double bid = 0.0;
  bool sold = false;
};

struct BuyerView {
  int buyer = 1;
  std::size_t round = 1;
  std::size_t horizon = 1;
  ContextVector context = ContextVector::make({1.0});
  double value = 0.0;
  std::span<const PublicRound> public_history;
  std::span<const OwnRound> own_history;
};

// Canonical string for an information set, used as a strategy-table key.
std::string information_set_key(const BuyerView& view);

class BuyerStrategy {
 public:
  virtual ~BuyerStrategy() = default;
  virtual double bid(const BuyerView& view, Rng& rng) = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<BuyerStrategy> clone() const = 0;
};

using StrategyProfile = std::vector<std::unique_ptr<BuyerStrategy>>;
StrategyProfile clone_profile(const StrategyProfile& profile);

class TruthfulBuyer final : public BuyerStrategy {
 public:
  double bid(const BuyerView& view, Rng&) override { return view.value; }
  std::string name() const override { return "truthful"; }
  std::unique_ptr<BuyerStrategy> clone() const override;
};

class ShadeBuyer final : public BuyerStrategy {
 public:
  explicit ShadeBuyer(double margin);
  double bid(const BuyerView& view, Rng&) override;
  std::string name() const override;
  std::unique_ptr<BuyerStrategy> clone() const override;

 private:
  double margin_;
};

// Bids `lowball` on its first `rounds` appearances, then truthfully.
class ThresholdDeceiver final : public BuyerStrategy {
 public:
  ThresholdDeceiver(std::size_t rounds, double lowball);
  double bid(const BuyerView& view, Rng&) override;
  std::string name() const override;
  std::unique_ptr<BuyerStrategy> clone() const override;

 private:
  std::size_t rounds_;
  double lowball_;
};

// Truthful bid plus uniform noise in [-width, width], clipped to [0, 1].
class NoisyBuyer final : public BuyerStrategy {
 public:
  explicit NoisyBuyer(double width);
  double bid(const BuyerView& view, Rng& rng) override;
  std::string name() const override;
  std::unique_ptr<BuyerStrategy> clone() const override;

 private:
  double width_;
};

class UnassignedInformationSet : public std::runtime_error {
 public:
  UnassignedInformationSet(std::string key, double value)
      : std::runtime_error("strategy table has no entry for an information set"),
        key_(std::move(key)),
        value_(value) {}
  const std::string& key() const { return key_; }
  // The buyer's value at that information set.
  double value() const { return value_; }

 private:
  std::string key_;
  double value_;
};

// Deterministic strategy given as an explicit map from information sets to bids.
class TableStrategy final : public BuyerStrategy {
 public:
  using Table = std::map<std::string, double>;
  explicit TableStrategy(Table table) : table_(std::move(table)) {}
  double bid(const BuyerView& view, Rng&) override;
  std::string name() const override { return "table"; }
  std::unique_ptr<BuyerStrategy> clone() const override;
  const Table& table() const { return table_; }

 private:
  Table table_;
};

// Follows `inner`, except that at round t* any bid more than delta away from the value is
// replaced by the value. Later rounds show `inner` the history it would have seen had it
// placed its own bid at t*, so the two strategies coincide whenever prices coincide.
class TruthfulSwitch final : public BuyerStrategy {
 public:
  TruthfulSwitch(std::unique_ptr<BuyerStrategy> inner, std::size_t switch_round, double delta,
                 double tol = kDefaultTolerance);
  TruthfulSwitch(const TruthfulSwitch& other);
  double bid(const BuyerView& view, Rng& rng) override;
  std::string name() const override { return "truthful-switch(" + inner_->name() + ")"; }
  std::unique_ptr<BuyerStrategy> clone() const override;
  bool switched() const { return switched_; }

 private:
  std::unique_ptr<BuyerStrategy> inner_;
  std::size_t switch_round_;
  double delta_;
  double tol_;
  bool switched_ = false;
  double inner_bid_ = 0.0;
};

}  // namespace omr
