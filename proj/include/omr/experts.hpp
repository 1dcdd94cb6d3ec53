#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "omr/rng.hpp"

namespace omr {

// Full-information online learning over K experts with rewards in [0, 1].
class ExpertAlgorithm {
 public:
  virtual ~ExpertAlgorithm() = default;
  virtual std::size_t expert_count() const = 0;
  virtual std::vector<double> distribution() const = 0;
  // Picks an expert using one uniform draw in [0, 1).
  virtual std::size_t choose(double uniform) const = 0;
  virtual void update(std::span<const double> rewards) = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<ExpertAlgorithm> clone() const = 0;
};

// Exponential weights with eta = sqrt(8 ln K / T). Weights are kept in log space.
class Hedge final : public ExpertAlgorithm {
 public:
  Hedge(std::size_t experts, std::size_t horizon);
  Hedge(std::size_t experts, std::size_t horizon, double learning_rate);

  std::size_t expert_count() const override { return log_weights_.size(); }
  std::vector<double> distribution() const override;
  std::size_t choose(double uniform) const override;
  void update(std::span<const double> rewards) override;
  std::string name() const override { return "hedge"; }
  std::unique_ptr<ExpertAlgorithm> clone() const override;

  double learning_rate() const { return eta_; }
  std::size_t horizon() const { return horizon_; }
  const std::vector<double>& log_weights() const { return log_weights_; }
  // sqrt(T ln K / 2)
  static double regret_bound(std::size_t experts, std::size_t horizon);

 private:
  void rebase();

  std::vector<double> log_weights_;
  double eta_;
  std::size_t horizon_;
  // exp(log_weights_ - base_), kept in step with log_weights_ so sampling needs no exp().
  std::vector<double> weights_;
  double total_;
  double base_ = 0.0;
  double top_ = 0.0;
};

// Plays the expert with the largest cumulative reward; ties go to the lowest index.
class FollowTheLeader final : public ExpertAlgorithm {
 public:
  explicit FollowTheLeader(std::size_t experts);

  std::size_t expert_count() const override { return totals_.size(); }
  std::vector<double> distribution() const override;
  std::size_t choose(double uniform) const override;
  void update(std::span<const double> rewards) override;
  std::string name() const override { return "follow-the-leader"; }
  std::unique_ptr<ExpertAlgorithm> clone() const override;

 private:
  std::size_t leader() const;
  std::vector<double> totals_;
};

// Coins xi_1..xi_T that decide which rounds reach the inner learner.
struct SparseGate {
  double rho = 1.0;
  std::vector<bool> coins;

  static SparseGate draw(double rho, std::size_t horizon, Rng& rng);
  static SparseGate scripted(std::vector<bool> coins, double rho);
};

// Forwards the round-t reward vector to the inner algorithm when xi_t = 1 and a zero vector
// otherwise. Each update() consumes one coin.
class SparseExpert final : public ExpertAlgorithm {
 public:
  SparseExpert(std::unique_ptr<ExpertAlgorithm> inner, SparseGate gate);
  SparseExpert(const SparseExpert& other);

  std::size_t expert_count() const override { return inner_->expert_count(); }
  std::vector<double> distribution() const override { return inner_->distribution(); }
  std::size_t choose(double uniform) const override { return inner_->choose(uniform); }
  void update(std::span<const double> rewards) override;
  std::string name() const override { return "sparse(" + inner_->name() + ")"; }
  std::unique_ptr<ExpertAlgorithm> clone() const override;

  // Coin for the next update.
  bool next_coin() const;
  std::size_t rounds() const { return round_; }
  const SparseGate& gate() const { return gate_; }

 private:
  std::unique_ptr<ExpertAlgorithm> inner_;
  SparseGate gate_;
  std::size_t round_ = 0;
  std::vector<double> zeros_;
};

struct ExpertRound {
  std::size_t chosen = 0;
  std::vector<double> rewards;
};

// max_k sum_t r_t(k) - sum_t r_t(chosen_t)
double expert_regret(std::span<const ExpertRound> rounds);

}  // namespace omr
