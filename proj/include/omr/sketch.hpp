#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omr/core.hpp"

namespace omr {

// Coefficient grid for sketches: coefficients are k * step with |k| <= max_multiplier.
struct SketchGrid {
  double step = 0.0;
  std::int64_t max_multiplier = 0;
  std::size_t max_support = 0;
  bool overridden = false;

  // step = eps^2 / 8, coefficients bounded by 2, support at most ceil(16 / eps^2).
  static SketchGrid for_epsilon(double epsilon);
  static SketchGrid custom(double step, std::int64_t max_multiplier, std::size_t max_support);
  std::uint64_t levels() const { return static_cast<std::uint64_t>(2 * max_multiplier + 1); }
};

struct Sketch {
  double epsilon = 0.0;
  double step = 0.0;
  std::vector<std::size_t> support;       // 1-based rounds, strictly increasing
  std::vector<std::int64_t> multipliers;  // same length as support

  double coefficient(std::size_t i) const { return static_cast<double>(multipliers[i]) * step; }
  bool empty() const { return support.empty(); }
};

// Throws std::invalid_argument if the sketch is malformed or lies outside the grid.
void validate(const Sketch& z, const SketchGrid& grid);

// Sum of |multiplier| over the support.
std::uint64_t update_count(const Sketch& z);

// v_t(z) = P(sum over tau in S, tau <= t of beta_tau x_tau), where t = prefix.size().
WeightVector reconstruct(const Sketch& z, std::span<const ContextVector> prefix);

// Online approximation of a fixed target weight. Each call to step() handles one round and
// returns v_t, which tracks <w, x_t> within eps^2 / 2.
class OnlineSketcher {
 public:
  OnlineSketcher(Vector target, double epsilon);

  Vector step(const ContextVector& x);
  Sketch sketch() const;
  std::uint64_t updates() const { return updates_; }
  std::size_t rounds() const { return round_; }

 private:
  Vector target_;
  double epsilon_;
  double step_;
  std::size_t iteration_cap_;
  std::size_t round_ = 0;
  Vector base_;
  std::vector<std::size_t> support_;
  std::vector<std::int64_t> multipliers_;
  std::uint64_t updates_ = 0;
};

Sketch construct_sketch(const WeightVector& w, std::span<const ContextVector> contexts,
                        double epsilon);

// |Z| = sum_{s <= max_support} C(T, s) * levels^s, or nullopt if it overflows 64 bits.
std::optional<std::uint64_t> count_sketch_set(std::size_t horizon, const SketchGrid& grid);

// Every (support, coefficient) pair, supports in lexicographic order and coefficient
// vectors in row-major order from -max_multiplier to max_multiplier. Throws CapExceeded.
std::vector<Sketch> enumerate_sketch_set(std::size_t horizon, double epsilon,
                                         const SketchGrid& grid, std::uint64_t cap);

struct LazyOgdState {
  Vector u;  // unprojected accumulator
  Vector v;  // current iterate, P(u)
  double step = 0.0;
  std::uint64_t updates = 0;

  static LazyOgdState init(std::size_t d, double step);
};

// u <- u - step * g, v <- P(u). Throws if ||g|| > 1.
LazyOgdState lazy_ogd_step(LazyOgdState state, std::span<const double> subgradient);

// A finite family of weight-producing experts. advance() reveals x_t; afterwards weight(k)
// and price(k) refer to round t.
class ExpertBank {
 public:
  virtual ~ExpertBank() = default;
  virtual std::size_t size() const = 0;
  virtual void advance(const ContextVector& x) = 0;
  virtual Vector weight(std::size_t k) const = 0;
  virtual std::span<const double> prices() const = 0;
  double price(std::size_t k) const { return prices()[k]; }
  virtual std::string mode() const = 0;
  virtual std::unique_ptr<ExpertBank> clone() const = 0;
};

// Exact mode: every sketch in a finite set, reconstructed incrementally.
class SketchSetBank final : public ExpertBank {
 public:
  SketchSetBank(std::vector<Sketch> sketches, std::size_t dim);

  std::size_t size() const override { return sketches_.size(); }
  void advance(const ContextVector& x) override;
  Vector weight(std::size_t k) const override;
  std::span<const double> prices() const override { return prices_; }
  std::string mode() const override { return "exact"; }
  std::unique_ptr<ExpertBank> clone() const override;
  const Sketch& sketch(std::size_t k) const { return sketches_[k]; }

 private:
  std::vector<Sketch> sketches_;
  std::size_t dim_;
  std::size_t round_ = 0;
  std::vector<std::size_t> cursor_;
  // Round of each sketch's next support index, 0 once exhausted.
  std::vector<std::size_t> next_;
  // Row-major, dim_ entries per sketch.
  std::vector<double> sums_;
  std::vector<double> weights_;
  std::vector<double> prices_;
};

// Sampled mode: a pool of reference weights, each followed online by its own sketcher.
// This is a heuristic stand-in for the full set when it is too large to enumerate.
class OnlineSketchBank final : public ExpertBank {
 public:
  OnlineSketchBank(std::vector<Vector> references, double epsilon);

  std::size_t size() const override { return sketchers_.size(); }
  void advance(const ContextVector& x) override;
  Vector weight(std::size_t k) const override { return weights_[k]; }
  std::span<const double> prices() const override { return prices_; }
  std::string mode() const override { return "sampled"; }
  std::unique_ptr<ExpertBank> clone() const override;

 private:
  std::vector<OnlineSketcher> sketchers_;
  std::vector<Vector> weights_;
  std::vector<double> prices_;
};

}  // namespace omr
