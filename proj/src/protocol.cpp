#include "omr/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "omr/best_response.hpp"

namespace omr {

RunResult run_protocol(const ProtocolConfig& config, Seller& seller, const StrategyProfile& profile,
                       Environment& env, const SeedTree& buyer_seeds) {
  const std::size_t T = config.horizon();
  const int n = config.partition.buyers();
  if (static_cast<int>(profile.size()) != n)
    throw std::invalid_argument("profile size does not match the partition");
  if (config.discount.buyers() != n)
    throw std::invalid_argument("discount profile does not match the partition");

  StrategyProfile buyers = clone_profile(profile);
  std::vector<Rng> rngs;
  for (int i = 1; i <= n; ++i) rngs.push_back(buyer_seeds.child("buyer", i).rng());

  std::vector<EnvironmentRecord> env_history;
  std::vector<PublicRound> public_history;
  std::vector<std::vector<OwnRound>> own(n);
  RunResult result;
  result.rounds.reserve(T);
  env_history.reserve(T);
  public_history.reserve(T);

  for (std::size_t t = 1; t <= T; ++t) {
    // The environment and the seller move on the same round-(t-1) information; the seller is
    // additionally shown x_t, as posted prices are contextual.
    EnvironmentDraw draw = [&] {
      PartyScope scope(Party::Environment);
      return env.emit({t, T, env_history});
    }();
    WeightVector w = [&] {
      PartyScope scope(Party::Seller);
      return seller.step(draw.context);
    }();
    if (w.dim() != draw.context.dim()) throw std::logic_error("seller weight has the wrong dimension");
    const double price = w.price(draw.context);
    const int i = config.partition.buyer_of(t);

    double raw_bid = [&] {
      PartyScope scope(Party::Buyer);
      BuyerView view;
      view.buyer = i;
      view.round = t;
      view.horizon = T;
      view.context = draw.context;
      view.value = draw.value.value();
      view.public_history = public_history;
      view.own_history = own[i - 1];
      return buyers[i - 1]->bid(view, rngs[i - 1]);
    }();
    Bid bid = Bid::make(raw_bid);
    const bool sold = sells(raw_bid, price, config.tol);

    SellerRoundLog log;
    {
      PartyScope scope(Party::Seller);
      seller.feedback(bid);
      log = seller.last_log();
    }

    RoundTrace r;
    r.round = t;
    r.buyer = i;
    r.context = draw.context;
    r.weight = w;
    r.price = price;
    r.bid = bid;
    r.value = draw.value;
    r.sold = sold;
    r.omega = log.omega;
    r.xi = log.xi;
    r.lambda = log.lambda;
    r.expert = log.expert;
    result.rounds.push_back(r);

    env_history.push_back({t, draw.context, w.coords(), price, draw.value.value()});
    public_history.push_back({t, i, draw.context, w.coords(), price, draw.value.value()});
    own[i - 1].push_back({t, raw_bid, sold});
  }

  result.revenue = total_revenue(result.rounds, config.tol);
  for (int i = 1; i <= n; ++i) result.utilities.push_back(discounted_utility(result.rounds, i, config.discount));
  if (config.oracle) {
    result.opt_truth = opt_hindsight(result.rounds, ValueSource::Truth, *config.oracle);
    bool truthful = std::all_of(result.rounds.begin(), result.rounds.end(), [](const RoundTrace& r) {
      return r.bid.value() == r.value.value();
    });
    result.opt_bids = truthful ? result.opt_truth
                               : opt_hindsight(result.rounds, ValueSource::Bids, *config.oracle);
  }
  result.metadata = seller.metadata();
  result.metadata["environment"] = env.id();
  result.metadata["buyer_seed"] = std::to_string(buyer_seeds.seed());
  result.metadata["horizon"] = std::to_string(T);
  return result;
}

namespace {

nlohmann::ordered_json opt_json(const std::optional<OptEstimate>& o) {
  if (!o) return nullptr;
  nlohmann::ordered_json j;
  j["value"] = o->value;
  j["error_bound"] = o->error_bound;
  j["mode"] = o->mode;
  j["span_rank"] = o->span_rank;
  j["directions"] = o->directions;
  j["argmax"] = o->argmax;
  return j;
}

}  // namespace

std::string to_json(const RunResult& result) {
  nlohmann::ordered_json j;
  j["revenue"] = result.revenue;
  j["opt_truth"] = opt_json(result.opt_truth);
  j["opt_bids"] = opt_json(result.opt_bids);
  j["utilities"] = result.utilities;
  j["metadata"] = result.metadata;
  auto& rounds = j["rounds"] = nlohmann::ordered_json::array();
  for (const auto& r : result.rounds) {
    nlohmann::ordered_json e;
    e["round"] = r.round;
    e["buyer"] = r.buyer;
    e["context"] = r.context.coords();
    e["weight"] = r.weight.coords();
    e["price"] = r.price;
    e["bid"] = r.bid.value();
    e["value"] = r.value.value();
    e["sold"] = r.sold;
    e["omega"] = r.omega;
    e["xi"] = r.xi;
    e["lambda"] = r.lambda;
    e["expert"] = r.expert;
    rounds.push_back(std::move(e));
  }
  return j.dump();
}

Stats summarize(std::span<const double> xs) {
  Stats s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.standard_error = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

RegretReport regret(const ProtocolConfig& config, const SellerFactory& make_seller,
                    const EnvironmentFactory& make_env, std::size_t replications,
                    const SeedTree& seeds, std::size_t threads, bool keep_runs) {
  if (!config.oracle) throw std::invalid_argument("regret needs an Opt oracle");
  if (replications == 0) throw std::invalid_argument("need at least one replication");
  StrategyProfile truthful;
  for (int i = 0; i < config.partition.buyers(); ++i) truthful.push_back(std::make_unique<TruthfulBuyer>());

  std::vector<RunResult> runs(replications);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t r = begin; r < replications; r += stride) {
      SeedTree rs = seeds.child("rep", r);
      auto seller = make_seller(rs.child("seller"));
      auto env = make_env(rs.child("environment"));
      runs[r] = run_protocol(config, *seller, truthful, *env, rs.child("buyers"));
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, replications));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t k = 0; k < threads; ++k)
      pool.emplace_back([&, k] {
        try {
          work(k, threads);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  RegretReport rep;
  std::vector<double> rev, opt;
  double err = 0.0;
  for (const auto& r : runs) {
    rev.push_back(r.revenue);
    opt.push_back(r.opt_truth->value);
    rep.per_replication.push_back(r.opt_truth->value - r.revenue);
    err += r.opt_truth->error_bound;
  }
  rep.regret = summarize(rep.per_replication);
  rep.revenue = summarize(rev);
  rep.opt = summarize(opt);
  rep.opt_error_bound = err / static_cast<double>(replications);
  if (keep_runs) rep.runs = std::move(runs);
  return rep;
}

std::vector<RunResult> play(const GameInstance& game, const StrategyProfile& profile) {
  std::vector<RunResult> out;
  out.reserve(game.scenarios.size());
  for (const auto& s : game.scenarios) {
    auto seller = game.make_seller(s);
    auto env = game.make_environment(s);
    out.push_back(run_protocol(game.config, *seller, profile, *env, s.seeds.child("buyers")));
  }
  return out;
}

double expected_utility(const GameInstance& game, const StrategyProfile& profile, int buyer) {
  auto u = scenario_utilities(game, profile, buyer);
  double total = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) total += game.scenarios[k].weight * u[k];
  return total;
}

std::vector<double> midpoint_grid(std::size_t cells) {
  if (cells == 0) throw std::invalid_argument("need at least one cell");
  std::vector<double> out(cells);
  for (std::size_t k = 0; k < cells; ++k)
    out[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(cells);
  return out;
}

std::vector<Scenario> enumerate_sum_scenarios(std::size_t horizon, double p_omega,
                                              std::span<const double> lambdas, double rho) {
  struct Outcome {
    bool omega;
    double lambda;
    bool xi;
    double weight;
  };
  std::vector<Outcome> per_round;
  for (int xi = 0; xi <= 1; ++xi) {
    double wx = xi ? rho : 1.0 - rho;
    if (wx <= 0.0) continue;
    if (p_omega < 1.0) per_round.push_back({false, 0.0, xi == 1, wx * (1.0 - p_omega)});
    if (p_omega > 0.0) {
      if (lambdas.empty()) throw std::invalid_argument("random pricing needs a lambda support");
      for (double l : lambdas)
        per_round.push_back({true, l, xi == 1, wx * p_omega / static_cast<double>(lambdas.size())});
    }
  }
  std::vector<Scenario> out;
  std::vector<std::size_t> idx(horizon, 0);
  for (std::size_t count = 0;; ++count) {
    Scenario s;
    s.seeds = SeedTree(count);
    SellerCoinScript script;
    s.weight = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const auto& o = per_round[idx[t]];
      script.omega.push_back(o.omega);
      script.lambda.push_back(o.lambda);
      script.xi.push_back(o.xi);
      s.weight *= o.weight;
    }
    s.coins = std::move(script);
    out.push_back(std::move(s));
    std::size_t t = horizon;
    for (;;) {
      if (t == 0) return out;
      --t;
      if (++idx[t] < per_round.size()) break;
      idx[t] = 0;
    }
  }
}

std::vector<Scenario> seeded_scenarios(std::size_t count, const SeedTree& seeds) {
  if (count == 0) throw std::invalid_argument("need at least one scenario");
  std::vector<Scenario> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k].weight = 1.0 / static_cast<double>(count);
    out[k].seeds = seeds.child("scenario", k);
  }
  return out;
}

namespace {

// Deviation family for games too large for the exhaustive search.
std::vector<std::unique_ptr<BuyerStrategy>> deviation_family() {
  std::vector<std::unique_ptr<BuyerStrategy>> f;
  f.push_back(std::make_unique<TruthfulBuyer>());
  for (double m : {0.05, 0.1, 0.2, 0.4}) f.push_back(std::make_unique<ShadeBuyer>(m));
  for (std::size_t k : {1, 2, 4, 8}) f.push_back(std::make_unique<ThresholdDeceiver>(k, 0.0));
  return f;
}

double weighted_se(const GameInstance& game, std::span<const double> diff) {
  if (game.exact) return 0.0;
  return summarize(diff).standard_error;
}

}  // namespace

SRegEstimate sreg_estimate(const GameInstance& game, std::span<const ProfileCandidate> pool,
                           const DeviationBudget& budget) {
  if (pool.empty()) throw std::invalid_argument("strategy pool is empty");
  if (!game.config.oracle) throw std::invalid_argument("strategic regret needs an Opt oracle");
  SRegEstimate est;
  const int n = game.config.partition.buyers();
  for (const auto& cand : pool) {
    StrategyProfile profile = cand.make();
    ProfileOutcome out;
    out.name = cand.name;
    auto runs = play(game, profile);
    std::vector<double> gap;
    double mean = 0.0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      gap.push_back(runs[k].opt_truth->value - runs[k].revenue);
      mean += game.scenarios[k].weight * gap.back();
    }
    out.opt_minus_revenue = mean;
    out.standard_error = weighted_se(game, gap);

    out.passed = true;
    for (int i = 1; i <= n; ++i) {
      auto base = scenario_utilities(game, profile, i);
      const auto& rounds = game.config.partition.rounds_of(i);
      std::vector<std::vector<double>> candidates;
      if (rounds.size() <= 4 && budget.bid_grid.size() <= 9 && !budget.bid_grid.empty()) {
        auto br = buyer_best_response(game, profile, i, budget.bid_grid, budget.node_cap);
        StrategyProfile dev = clone_profile(profile);
        dev[i - 1] = std::make_unique<TableStrategy>(br.table);
        candidates.push_back(scenario_utilities(game, dev, i));
      } else {
        for (auto& s : deviation_family()) {
          StrategyProfile dev = clone_profile(profile);
          dev[i - 1] = std::move(s);
          candidates.push_back(scenario_utilities(game, dev, i));
        }
      }
      for (const auto& c : candidates) {
        std::vector<double> diff(c.size());
        double gain = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
          diff[k] = c[k] - base[k];
          gain += game.scenarios[k].weight * diff[k];
        }
        double tol = std::max(budget.epsilon_nash, 2.0 * weighted_se(game, diff));
        out.max_deviation_gain = std::max(out.max_deviation_gain, gain);
        out.tolerance = std::max(out.tolerance, tol);
        if (gain > tol) out.passed = false;
      }
    }
    if (out.passed) {
      est.value = est.any_passed ? std::max(est.value, out.opt_minus_revenue) : out.opt_minus_revenue;
      est.any_passed = true;
    }
    est.profiles.push_back(out);
  }
  return est;
}

}  // namespace omr
