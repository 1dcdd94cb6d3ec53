#include "omr/experts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omr {

namespace {

void check_rewards(std::span<const double> r, std::size_t k) {
  if (r.size() != k) throw std::invalid_argument("reward vector has the wrong length");
}

}  // namespace

Hedge::Hedge(std::size_t experts, std::size_t horizon)
    : Hedge(experts, horizon,
            experts <= 1 || horizon == 0
                ? 0.0
                : std::sqrt(8.0 * std::log(static_cast<double>(experts)) /
                            static_cast<double>(horizon))) {}

Hedge::Hedge(std::size_t experts, std::size_t horizon, double learning_rate)
    : log_weights_(experts, 0.0),
      eta_(learning_rate),
      horizon_(horizon),
      weights_(experts, 1.0),
      total_(static_cast<double>(experts)) {
  if (experts == 0) throw std::invalid_argument("hedge needs at least one expert");
  if (horizon == 0) throw std::invalid_argument("hedge needs a positive horizon");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be nonnegative");
}

double Hedge::regret_bound(std::size_t experts, std::size_t horizon) {
  return std::sqrt(static_cast<double>(horizon) * std::log(static_cast<double>(experts)) / 2.0);
}

std::vector<double> Hedge::distribution() const {
  std::vector<double> p(log_weights_.size());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) total += p[k] = std::exp(log_weights_[k] - top_);
  for (double& q : p) q /= total;
  return p;
}

std::size_t Hedge::choose(double uniform) const {
  const std::size_t n = weights_.size();
  double target = uniform * total_;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += weights_[k];
    if (target < acc) return k;
  }
  // Rounding can leave target == total; fall back to the last expert with positive mass.
  for (std::size_t k = n; k-- > 0;)
    if (weights_[k] > 0.0) return k;
  return n - 1;
}

void Hedge::rebase() {
  base_ = top_;
  total_ = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) total_ += weights_[k] = std::exp(log_weights_[k] - base_);
}

void Hedge::update(std::span<const double> rewards) {
  check_rewards(rewards, log_weights_.size());
  total_ = 0.0;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    double r = rewards[k];
    if (r < -1e-12 || r > 1.0 + 1e-12) throw std::invalid_argument("hedge rewards must lie in [0, 1]");
    if (r != 0.0) {
      log_weights_[k] += eta_ * r;
      weights_[k] *= std::exp(eta_ * r);
      top_ = std::max(top_, log_weights_[k]);
    }
    total_ += weights_[k];
  }
  if (top_ - base_ > 200.0) rebase();
}

std::unique_ptr<ExpertAlgorithm> Hedge::clone() const { return std::make_unique<Hedge>(*this); }

FollowTheLeader::FollowTheLeader(std::size_t experts) : totals_(experts, 0.0) {
  if (experts == 0) throw std::invalid_argument("need at least one expert");
}

std::size_t FollowTheLeader::leader() const {
  return static_cast<std::size_t>(std::max_element(totals_.begin(), totals_.end()) -
                                  totals_.begin());
}

std::vector<double> FollowTheLeader::distribution() const {
  std::vector<double> p(totals_.size(), 0.0);
  p[leader()] = 1.0;
  return p;
}

std::size_t FollowTheLeader::choose(double) const { return leader(); }

void FollowTheLeader::update(std::span<const double> rewards) {
  check_rewards(rewards, totals_.size());
  for (std::size_t k = 0; k < rewards.size(); ++k) totals_[k] += rewards[k];
}

std::unique_ptr<ExpertAlgorithm> FollowTheLeader::clone() const {
  return std::make_unique<FollowTheLeader>(*this);
}

SparseGate SparseGate::draw(double rho, std::size_t horizon, Rng& rng) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
  SparseGate g;
  g.rho = rho;
  g.coins.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) g.coins[t] = bernoulli(rng, rho);
  return g;
}

SparseGate SparseGate::scripted(std::vector<bool> coins, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  SparseGate g;
  g.rho = rho;
  g.coins = std::move(coins);
  return g;
}

SparseExpert::SparseExpert(std::unique_ptr<ExpertAlgorithm> inner, SparseGate gate)
    : inner_(std::move(inner)), gate_(std::move(gate)) {
  if (!inner_) throw std::invalid_argument("sparse wrapper needs an inner algorithm");
  zeros_.assign(inner_->expert_count(), 0.0);
}

SparseExpert::SparseExpert(const SparseExpert& other)
    : inner_(other.inner_->clone()),
      gate_(other.gate_),
      round_(other.round_),
      zeros_(other.zeros_) {}

bool SparseExpert::next_coin() const {
  if (round_ >= gate_.coins.size()) throw std::out_of_range("sparse gate ran out of coins");
  return gate_.coins[round_];
}

void SparseExpert::update(std::span<const double> rewards) {
  check_rewards(rewards, zeros_.size());
  bool xi = next_coin();
  ++round_;
  if (xi)
    inner_->update(rewards);
  else
    inner_->update(zeros_);
}

std::unique_ptr<ExpertAlgorithm> SparseExpert::clone() const {
  return std::make_unique<SparseExpert>(*this);
}

double expert_regret(std::span<const ExpertRound> rounds) {
  if (rounds.empty()) return 0.0;
  std::vector<double> totals(rounds.front().rewards.size(), 0.0);
  double earned = 0.0;
  for (const auto& r : rounds) {
    check_rewards(r.rewards, totals.size());
    for (std::size_t k = 0; k < totals.size(); ++k) totals[k] += r.rewards[k];
    earned += r.rewards.at(r.chosen);
  }
  return *std::max_element(totals.begin(), totals.end()) - earned;
}

}  // namespace omr
