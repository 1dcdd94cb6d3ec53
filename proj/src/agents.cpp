#include "omr/agents.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace omr {

double compute_rho(double epsilon, double gamma_bar) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (!(gamma_bar >= 0.0 && gamma_bar < 1.0))
    throw std::invalid_argument("gamma_bar must lie in [0, 1)");
  if (gamma_bar == 0.0) return 1.0;
  return std::min(1.0, (1.0 - gamma_bar) * std::pow(epsilon, 5) / (3.0 * gamma_bar));
}

double compute_delta(double epsilon, double gamma_bar, double rho) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(gamma_bar >= 0.0 && gamma_bar < 1.0))
    throw std::invalid_argument("gamma_bar must lie in [0, 1)");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (gamma_bar == 0.0) return 0.0;
  return std::sqrt(3.0 * rho * gamma_bar / (epsilon * (1.0 - gamma_bar)));
}

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

SeededSellerCoins::SeededSellerCoins(const SeedTree& seeds)
    : expert_(seeds.child("expert-sampling").rng()),
      omega_(seeds.child("seller-omega").rng()),
      lambda_(seeds.child("seller-lambda").rng()),
      xi_(seeds.child("seller-xi").rng()) {}

std::vector<bool> SeededSellerCoins::xi_sequence(std::size_t horizon, double rho) {
  std::vector<bool> xi(horizon);
  for (std::size_t t = 0; t < horizon; ++t) xi[t] = bernoulli(xi_, rho);
  return xi;
}

double ScriptedSellerCoins::expert_uniform() {
  if (script_.expert_uniform.empty()) return 0.5;
  return script_.expert_uniform.at(expert_calls_++);
}

bool ScriptedSellerCoins::omega(double) {
  if (script_.omega.empty()) return false;
  return script_.omega.at(omega_calls_++);
}

double ScriptedSellerCoins::lambda() {
  // One lambda entry per omega draw, so rounds stay aligned whichever branch was taken.
  std::size_t idx = omega_calls_ == 0 ? 0 : omega_calls_ - 1;
  ++lambda_calls_;
  return script_.lambda.at(idx);
}

std::vector<bool> ScriptedSellerCoins::xi_sequence(std::size_t horizon, double) {
  std::vector<bool> xi = script_.xi;
  if (xi.size() < horizon) xi.resize(horizon, false);
  return xi;
}

void SellerBase::begin_step() {
  if (awaiting_feedback_) throw std::logic_error("seller step called twice without feedback");
  awaiting_feedback_ = true;
  ++round_;
}

void SellerBase::begin_feedback() {
  if (!awaiting_feedback_) throw std::logic_error("seller feedback without a pending step");
  awaiting_feedback_ = false;
}

SellerOmr::SellerOmr(std::unique_ptr<ExpertBank> bank, std::unique_ptr<ExpertAlgorithm> learner,
                     std::unique_ptr<SellerCoins> coins, double tol)
    : bank_(std::move(bank)), learner_(std::move(learner)), coins_(std::move(coins)), tol_(tol) {
  if (!bank_ || !learner_ || !coins_) throw std::invalid_argument("seller needs bank, learner, coins");
  if (bank_->size() != learner_->expert_count())
    throw std::invalid_argument("learner and bank disagree on the number of experts");
  rewards_.assign(bank_->size(), 0.0);
  totals_.assign(bank_->size(), 0.0);
}

WeightVector SellerOmr::step(const ContextVector& x) {
  begin_step();
  bank_->advance(x);
  std::size_t k = learner_->choose(coins_->expert_uniform());
  log_ = {};
  log_.expert = static_cast<long long>(k);
  return WeightVector::make(bank_->weight(k), 1e-9);
}

void SellerOmr::feedback(const Bid& b) {
  begin_feedback();
  double bid = b.value();
  auto prices = bank_->prices();
  for (std::size_t k = 0; k < rewards_.size(); ++k) {
    rewards_[k] = revenue_at(prices[k], bid, tol_);
    totals_[k] += rewards_[k];
  }
  learner_->update(rewards_);
}

Metadata SellerOmr::metadata() const {
  double best = totals_.empty() ? 0.0 : *std::max_element(totals_.begin(), totals_.end());
  return {{"seller", id()},
          {"expert_mode", bank_->mode()},
          {"expert_count", std::to_string(bank_->size())},
          {"learner", learner_->name()},
          {"best_expert_revenue", fmt(best)}};
}

double SumParams::rho() const {
  if (rho_override) {
    if (!(*rho_override >= 0.0 && *rho_override <= 1.0))
      throw std::invalid_argument("rho override must lie in [0, 1]");
    return *rho_override;
  }
  return compute_rho(epsilon, gamma_bar);
}

double SumParams::random_pricing_probability() const {
  double p = random_pricing_override.value_or(epsilon);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("random pricing probability out of range");
  return p;
}

std::size_t SellerSum::inner_horizon(const SumParams& params) {
  double h = std::ceil(params.rho() * static_cast<double>(params.horizon) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(h, 0.0)));
}

SellerSum::SellerSum(std::unique_ptr<ExpertBank> bank, std::unique_ptr<ExpertAlgorithm> inner,
                     SumParams params, std::unique_ptr<SellerCoins> coins, double tol)
    : bank_(std::move(bank)), params_(params), coins_(std::move(coins)), tol_(tol) {
  if (!bank_ || !inner || !coins_) throw std::invalid_argument("seller needs bank, learner, coins");
  if (!(params_.epsilon > 0.0 && params_.epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (params_.horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (bank_->size() != inner->expert_count())
    throw std::invalid_argument("learner and bank disagree on the number of experts");
  rho_ = params_.rho();
  delta_ = compute_delta(params_.epsilon, params_.gamma_bar, rho_);
  std::vector<bool> xi = rho_ > 0.0 ? coins_->xi_sequence(params_.horizon, rho_)
                                    : std::vector<bool>(params_.horizon, false);
  learner_ = std::make_unique<SparseExpert>(std::move(inner), SparseGate::scripted(std::move(xi), rho_));
  rewards_.assign(bank_->size(), 0.0);
}

WeightVector SellerSum::step(const ContextVector& x) {
  begin_step();
  if (round() > params_.horizon) throw std::logic_error("seller stepped past its horizon");
  bank_->advance(x);
  log_ = {};
  log_.xi = learner_->next_coin() ? 1 : 0;
  bool omega = coins_->omega(params_.random_pricing_probability());
  log_.omega = omega ? 1 : 0;
  if (omega) {
    double lambda = coins_->lambda();
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::logic_error("lambda outside [0, 1]");
    log_.lambda = lambda;
    Vector w = x.coords();
    for (double& c : w) c *= lambda;
    return WeightVector::make(std::move(w), 1e-9);
  }
  std::size_t k = learner_->choose(coins_->expert_uniform());
  log_.expert = static_cast<long long>(k);
  return WeightVector::make(bank_->weight(k), 1e-9);
}

void SellerSum::feedback(const Bid& b) {
  begin_feedback();
  double bid = b.value();
  auto prices = bank_->prices();
  for (std::size_t k = 0; k < rewards_.size(); ++k) rewards_[k] = revenue_at(prices[k], bid, tol_);
  learner_->update(rewards_);
}

Metadata SellerSum::metadata() const {
  return {{"seller", id()},
          {"expert_mode", bank_->mode()},
          {"expert_count", std::to_string(bank_->size())},
          {"learner", learner_->name()},
          {"rho", fmt(rho_)},
          {"delta", fmt(delta_)},
          {"random_pricing_probability", fmt(params_.random_pricing_probability())}};
}

CopyBidSeller::CopyBidSeller(double initial_price) : price_(initial_price) {
  if (!(initial_price >= 0.0 && initial_price <= 1.0))
    throw std::invalid_argument("initial price must lie in [0, 1]");
}

WeightVector CopyBidSeller::step(const ContextVector& x) {
  begin_step();
  Vector w = x.coords();
  for (double& c : w) c *= price_;
  return WeightVector::make(std::move(w), 1e-9);
}

void CopyBidSeller::feedback(const Bid& b) {
  begin_feedback();
  price_ = b.value();
}

WeightVector FixedWeightSeller::step(const ContextVector& x) {
  begin_step();
  if (x.dim() != w_.dim()) throw std::invalid_argument("context dimension mismatch");
  return w_;
}

void FixedWeightSeller::feedback(const Bid&) { begin_feedback(); }

std::string information_set_key(const BuyerView& view) {
  std::string key;
  key.reserve(64 + 48 * view.public_history.size());
  key += "b" + std::to_string(view.buyer) + "|t" + std::to_string(view.round) + "|v" +
         fmt(view.value) + "|x";
  for (double c : view.context.coords()) key += fmt(c) + ",";
  key += "|own";
  for (const auto& o : view.own_history)
    key += ";" + std::to_string(o.round) + ":" + fmt(o.bid) + (o.sold ? "S" : "N");
  key += "|pub";
  for (const auto& p : view.public_history) {
    key += ";" + std::to_string(p.round) + ":" + std::to_string(p.buyer) + ":" + fmt(p.price) +
           ":" + fmt(p.value) + ":";
    for (double c : p.context.coords()) key += fmt(c) + ",";
    key += ":";
    for (double c : p.weight) key += fmt(c) + ",";
  }
  return key;
}

StrategyProfile clone_profile(const StrategyProfile& profile) {
  StrategyProfile out;
  out.reserve(profile.size());
  for (const auto& s : profile) out.push_back(s->clone());
  return out;
}

std::unique_ptr<BuyerStrategy> TruthfulBuyer::clone() const {
  return std::make_unique<TruthfulBuyer>(*this);
}

ShadeBuyer::ShadeBuyer(double margin) : margin_(margin) {
  if (!(margin >= 0.0 && margin <= 1.0)) throw std::invalid_argument("margin must lie in [0, 1]");
}

double ShadeBuyer::bid(const BuyerView& view, Rng&) { return std::max(0.0, view.value - margin_); }
std::string ShadeBuyer::name() const { return "shade:" + fmt(margin_); }
std::unique_ptr<BuyerStrategy> ShadeBuyer::clone() const { return std::make_unique<ShadeBuyer>(*this); }

ThresholdDeceiver::ThresholdDeceiver(std::size_t rounds, double lowball)
    : rounds_(rounds), lowball_(lowball) {
  if (!(lowball >= 0.0 && lowball <= 1.0)) throw std::invalid_argument("lowball must lie in [0, 1]");
}

double ThresholdDeceiver::bid(const BuyerView& view, Rng&) {
  return view.own_history.size() < rounds_ ? lowball_ : view.value;
}

std::string ThresholdDeceiver::name() const {
  return "deceiver:" + std::to_string(rounds_) + ":" + fmt(lowball_);
}

std::unique_ptr<BuyerStrategy> ThresholdDeceiver::clone() const {
  return std::make_unique<ThresholdDeceiver>(*this);
}

NoisyBuyer::NoisyBuyer(double width) : width_(width) {
  if (!(width >= 0.0 && width <= 1.0)) throw std::invalid_argument("noise width must lie in [0, 1]");
}

double NoisyBuyer::bid(const BuyerView& view, Rng& rng) {
  double noise = (2.0 * uniform01(rng) - 1.0) * width_;
  return std::clamp(view.value + noise, 0.0, 1.0);
}

std::string NoisyBuyer::name() const { return "noisy:" + fmt(width_); }
std::unique_ptr<BuyerStrategy> NoisyBuyer::clone() const { return std::make_unique<NoisyBuyer>(*this); }

double TableStrategy::bid(const BuyerView& view, Rng&) {
  std::string key = information_set_key(view);
  auto it = table_.find(key);
  if (it == table_.end()) throw UnassignedInformationSet(std::move(key), view.value);
  return it->second;
}

std::unique_ptr<BuyerStrategy> TableStrategy::clone() const {
  return std::make_unique<TableStrategy>(*this);
}

TruthfulSwitch::TruthfulSwitch(std::unique_ptr<BuyerStrategy> inner, std::size_t switch_round,
                               double delta, double tol)
    : inner_(std::move(inner)), switch_round_(switch_round), delta_(delta), tol_(tol) {
  if (!inner_) throw std::invalid_argument("truthful switch needs an inner strategy");
  if (switch_round == 0) throw std::invalid_argument("rounds are 1-based");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
}

TruthfulSwitch::TruthfulSwitch(const TruthfulSwitch& other)
    : inner_(other.inner_->clone()),
      switch_round_(other.switch_round_),
      delta_(other.delta_),
      tol_(other.tol_),
      switched_(other.switched_),
      inner_bid_(other.inner_bid_) {}

double TruthfulSwitch::bid(const BuyerView& view, Rng& rng) {
  if (view.round < switch_round_ || !switched_) {
    double b = inner_->bid(view, rng);
    if (view.round == switch_round_ && std::abs(view.value - b) > delta_) {
      switched_ = true;
      inner_bid_ = b;
      return view.value;
    }
    return b;
  }
  // Rewrite round t* of the own history to what the inner strategy actually bid.
  std::vector<OwnRound> own(view.own_history.begin(), view.own_history.end());
  double price = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : view.public_history)
    if (p.round == switch_round_) price = p.price;
  for (auto& o : own) {
    if (o.round != switch_round_) continue;
    o.bid = inner_bid_;
    o.sold = sells(inner_bid_, price, tol_);
  }
  BuyerView patched = view;
  patched.own_history = own;
  return inner_->bid(patched, rng);
}

std::unique_ptr<BuyerStrategy> TruthfulSwitch::clone() const {
  return std::make_unique<TruthfulSwitch>(*this);
}

}  // namespace omr
