#include <doctest.h>

#include <cmath>

#include "omr/agents.hpp"
#include "omr/best_response.hpp"
#include "omr/environment.hpp"
#include "omr/protocol.hpp"

using namespace omr;

namespace {

ProtocolConfig config(std::size_t T, double gamma = 0.0) {
  ProtocolConfig c;
  c.partition = RoundPartition::single(T);
  c.discount = DiscountProfile::uniform(1, gamma);
  return c;
}

StrategyProfile one(std::unique_ptr<BuyerStrategy> s) {
  StrategyProfile p;
  p.push_back(std::move(s));
  return p;
}

// The copy-price seller game: two rounds, value 0.8 in each, gamma 0.9.
GameInstance copy_game() {
  GameInstance g;
  g.config = config(2, 0.9);
  g.make_seller = [](const Scenario&) -> std::unique_ptr<Seller> { return std::make_unique<CopyBidSeller>(1.0); };
  g.make_environment = [](const Scenario&) {
    return env_fixed({{{1.0}, 0.8}, {{1.0}, 0.8}});
  };
  g.scenarios = {Scenario{1.0, SeedTree(1), std::nullopt}};
  return g;
}

// A seller that reads a true value it should never hold.
class SnoopingSeller final : public SellerBase {
 public:
  explicit SnoopingSeller(TrueValue v) : v_(v) {}
  WeightVector step(const ContextVector&) override {
    begin_step();
    double peek = v_.value();
    return WeightVector::make({peek});
  }
  void feedback(const Bid&) override { begin_feedback(); }
  SellerRoundLog last_log() const override { return {}; }
  std::string id() const override { return "snoop"; }

 private:
  TrueValue v_;
};

// An environment that tries to read the buyer's bid through a captured handle.
class SnoopingEnvironment final : public Environment {
 public:
  explicit SnoopingEnvironment(Bid b) : b_(b) {}
  EnvironmentDraw emit(const EnvironmentView&) override {
    return {ContextVector::make({1.0}), TrueValue::make(b_.value())};
  }
  std::size_t dimension() const override { return 1; }
  std::string id() const override { return "snoop"; }

 private:
  Bid b_;
};

}  // namespace

TEST_CASE("single round with a sale") {
  auto env = env_fixed({{{1.0, 0.0}, 0.5}});
  FixedWeightSeller seller(WeightVector::make({0.4, 0.0}));
  auto run = run_protocol(config(1), seller, one(std::make_unique<TruthfulBuyer>()), *env, SeedTree(1));
  CHECK(run.rounds[0].sold);
  CHECK(run.revenue == doctest::Approx(0.4));
  CHECK(run.utilities[0] == doctest::Approx(0.1));
}

TEST_CASE("single round without a sale") {
  auto env = env_fixed({{{1.0, 0.0}, 0.5}});
  FixedWeightSeller seller(WeightVector::make({0.6, 0.0}));
  auto run = run_protocol(config(1), seller, one(std::make_unique<TruthfulBuyer>()), *env, SeedTree(1));
  CHECK_FALSE(run.rounds[0].sold);
  CHECK(run.revenue == 0.0);
  CHECK(run.utilities[0] == 0.0);
}

TEST_CASE("identical seeds give identical serialized runs") {
  auto sketches = enumerate_sketch_set(50, 0.25, SketchGrid::custom(0.25, 4, 1), 100000);
  auto go = [&] {
    SeedTree s(99);
    SumParams params;
    params.epsilon = 0.25;
    params.gamma_bar = 0.5;
    params.horizon = 50;
    params.rho_override = 0.3;
    SellerSum seller(std::make_unique<SketchSetBank>(sketches, 2),
                     std::make_unique<Hedge>(sketches.size(), SellerSum::inner_horizon(params)), params,
                     std::make_unique<SeededSellerCoins>(s.child("seller")));
    auto env = env_iid(2, contexts::uniform_sphere(2), values::uniform(), s.child("environment"));
    ProtocolConfig c = config(50);
    c.oracle = OptOracleConfig{};
    c.oracle->resolution = 0.05;
    return to_json(run_protocol(c, seller, one(std::make_unique<NoisyBuyer>(0.1)), *env, s.child("buyers")));
  };
  CHECK(go() == go());
}

TEST_CASE("bids never reach the environment") {
  auto sketches = enumerate_sketch_set(30, 0.25, SketchGrid::custom(0.25, 4, 1), 100000);
  auto go = [&](std::unique_ptr<BuyerStrategy> s) {
    SeedTree seeds(5);
    SellerOmr seller(std::make_unique<SketchSetBank>(sketches, 2), std::make_unique<Hedge>(sketches.size(), 30),
                     std::make_unique<SeededSellerCoins>(seeds.child("seller")));
    auto env = env_iid(2, contexts::uniform_sphere(2), values::uniform(), seeds.child("environment"));
    return run_protocol(config(30), seller, one(std::move(s)), *env, seeds.child("buyers"));
  };
  auto a = go(std::make_unique<TruthfulBuyer>());
  auto b = go(std::make_unique<ShadeBuyer>(0.3));
  for (std::size_t t = 0; t < 30; ++t) {
    CHECK(a.rounds[t].context.coords() == b.rounds[t].context.coords());
    CHECK(a.rounds[t].value.value() == b.rounds[t].value.value());
  }

  SnoopingEnvironment env(Bid::make(0.5));
  FixedWeightSeller seller(WeightVector::make({0.1}));
  CHECK_THROWS_AS(run_protocol(config(1), seller, one(std::make_unique<TruthfulBuyer>()), env, SeedTree(1)),
                  InformationLeak);
}

TEST_CASE("true values never reach the seller") {
  SnoopingSeller seller(TrueValue::make(0.5));
  auto env = env_fixed({{{1.0}, 0.5}});
  CHECK_THROWS_AS(run_protocol(config(1), seller, one(std::make_unique<TruthfulBuyer>()), *env, SeedTree(1)),
                  InformationLeak);
}

TEST_CASE("regret with only the empty expert equals the optimum") {
  ProtocolConfig c = config(40);
  c.oracle = OptOracleConfig{};
  c.oracle->resolution = 0.01;
  SellerFactory make_seller = [](const SeedTree& s) -> std::unique_ptr<Seller> {
    return std::make_unique<SellerOmr>(std::make_unique<SketchSetBank>(std::vector<Sketch>{Sketch{}}, 2),
                                       std::make_unique<Hedge>(1, 40), std::make_unique<SeededSellerCoins>(s));
  };
  EnvironmentFactory make_env = [](const SeedTree& s) {
    return env_iid(2, contexts::uniform_sphere(2), values::uniform(), s);
  };
  auto rep = regret(c, make_seller, make_env, 4, SeedTree(3), 1, true);
  CHECK(rep.revenue.mean == 0.0);
  CHECK(rep.regret.mean == doctest::Approx(rep.opt.mean));
  auto threaded = regret(c, make_seller, make_env, 4, SeedTree(3), 3);
  CHECK(threaded.per_replication == rep.per_replication);
}

TEST_CASE("posting the hindsight optimum leaves only oracle error") {
  std::vector<FixedRound> seq;
  Rng rng(6);
  for (int t = 0; t < 30; ++t) seq.push_back({random_unit_vector(rng, 2), uniform01(rng)});
  ProtocolConfig c = config(30);
  c.oracle = OptOracleConfig{};
  c.oracle->resolution = 0.01;
  FixedWeightSeller probe(WeightVector::zero(2));
  auto env0 = env_fixed(seq);
  auto first = run_protocol(c, probe, one(std::make_unique<TruthfulBuyer>()), *env0, SeedTree(1));
  FixedWeightSeller oracle_seller(WeightVector::make(first.opt_truth->argmax, 1e-9));
  auto env1 = env_fixed(seq);
  auto run = run_protocol(c, oracle_seller, one(std::make_unique<TruthfulBuyer>()), *env1, SeedTree(1));
  CHECK(run.opt_truth->value - run.revenue == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("best response against the copy-price seller deceives") {
  auto g = copy_game();
  StrategyProfile p = one(std::make_unique<TruthfulBuyer>());
  std::vector<double> grid = {0.0, 0.4, 0.8};
  auto br = buyer_best_response(g, p, 1, grid);
  CHECK(br.utility == doctest::Approx(0.72));
  CHECK(expected_utility(g, p, 1) == doctest::Approx(0.0));
  auto dec = one(std::make_unique<ThresholdDeceiver>(1, 0.0));
  CHECK(expected_utility(g, dec, 1) == doctest::Approx(0.72));
}

TEST_CASE("single round best response is truthful") {
  GameInstance g;
  g.config = config(1, 0.5);
  g.make_seller = [](const Scenario& s) -> std::unique_ptr<Seller> {
    return std::make_unique<FixedWeightSeller>(WeightVector::make({s.seeds.seed() == 1 ? 0.3 : 0.6}));
  };
  g.make_environment = [](const Scenario&) { return env_fixed({{{1.0}, 0.5}}); };
  g.scenarios = {Scenario{0.25, SeedTree(1), std::nullopt}, Scenario{0.75, SeedTree(2), std::nullopt}};
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  auto br = buyer_best_response(g, one(std::make_unique<TruthfulBuyer>()), 1, grid);
  CHECK(br.utility == doctest::Approx(0.25 * 0.2));
  REQUIRE(br.table.size() == 1);
  CHECK(br.table.begin()->second == 0.5);
}

TEST_CASE("gated seller without influence removes the deception") {
  GameInstance g;
  g.config = config(2, 0.9);
  auto sketches = enumerate_sketch_set(2, 0.25, SketchGrid::custom(0.2, 5, 1), 1000);
  SumParams params;
  params.epsilon = 0.25;
  params.gamma_bar = 0.9;
  params.horizon = 2;
  params.rho_override = 0.0;
  g.make_seller = [sketches, params](const Scenario& s) -> std::unique_ptr<Seller> {
    return std::make_unique<SellerSum>(std::make_unique<SketchSetBank>(sketches, 1),
                                       std::make_unique<FollowTheLeader>(sketches.size()), params,
                                       std::make_unique<ScriptedSellerCoins>(*s.coins));
  };
  g.make_environment = [](const Scenario&) { return env_fixed({{{1.0}, 0.8}, {{1.0}, 0.8}}); };
  auto lambdas = midpoint_grid(5);
  g.scenarios = enumerate_sum_scenarios(2, 0.25, lambdas, 0.0);
  double total = 0.0;
  for (const auto& s : g.scenarios) total += s.weight;
  CHECK(total == doctest::Approx(1.0));
  auto truthful = one(std::make_unique<TruthfulBuyer>());
  std::vector<double> grid = {0.0, 0.4, 0.8};
  auto br = buyer_best_response(g, truthful, 1, grid);
  CHECK(br.utility == doctest::Approx(expected_utility(g, truthful, 1)).epsilon(1e-12));
}

TEST_CASE("strategic regret estimate") {
  auto g = copy_game();
  g.config.oracle = OptOracleConfig{};
  g.config.oracle->resolution = 1e-3;
  std::vector<ProfileCandidate> pool = {
      {"deceiver", [] { return one(std::make_unique<ThresholdDeceiver>(1, 0.0)); }},
      {"truthful", [] { return one(std::make_unique<TruthfulBuyer>()); }}};
  DeviationBudget budget;
  budget.bid_grid = {0.0, 0.4, 0.8};
  auto est = sreg_estimate(g, pool, budget);
  REQUIRE(est.profiles.size() == 2);
  CHECK(est.profiles[0].passed);
  CHECK(est.profiles[0].opt_minus_revenue == doctest::Approx(1.6));
  CHECK_FALSE(est.profiles[1].passed);
  CHECK(est.value == doctest::Approx(1.6));
  CHECK(est.label == "lower-bound estimate");
  CHECK_THROWS(sreg_estimate(g, std::span<const ProfileCandidate>{}, budget));
}

TEST_CASE("midpoint grid and scenario weights") {
  CHECK(midpoint_grid(4) == std::vector<double>{0.125, 0.375, 0.625, 0.875});
  auto lambdas = midpoint_grid(2);
  auto sc = enumerate_sum_scenarios(2, 0.5, lambdas, 0.25);
  double total = 0.0;
  for (const auto& s : sc) {
    CHECK(s.weight > 0.0);
    total += s.weight;
  }
  CHECK(total == doctest::Approx(1.0));
  // omega, lambda and xi per round: (1 + 2) * 2 outcomes per round.
  CHECK(sc.size() == 36);
}
