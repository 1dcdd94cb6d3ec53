#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "omr/core.hpp"
#include "omr/rng.hpp"

namespace omr {

// One past round as the environment sees it. There is deliberately no bid or allocation field.
struct EnvironmentRecord {
  std::size_t round = 0;
  ContextVector context = ContextVector::make({1.0});
  Vector weight;
  double price = 0.0;
  double value = 0.0;
};

struct EnvironmentView {
  std::size_t round = 1;  // the round about to be played
  std::size_t horizon = 1;
  std::span<const EnvironmentRecord> history;
};

struct EnvironmentDraw {
  ContextVector context = ContextVector::make({1.0});
  TrueValue value = TrueValue::make(0.0);
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual EnvironmentDraw emit(const EnvironmentView& view) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string id() const = 0;
};

struct FixedRound {
  Vector context;
  double value = 0.0;
};

// Replays a fixed sequence. Throws std::invalid_argument on non-unit contexts.
std::unique_ptr<Environment> env_fixed(std::vector<FixedRound> sequence,
                                       double tol = kDefaultTolerance);

using ContextSampler = std::function<Vector(Rng&)>;
// Draws a value given the context.
using ValueSampler = std::function<double(const Vector&, Rng&)>;

namespace contexts {
ContextSampler uniform_sphere(std::size_t d);
ContextSampler point_mass(Vector x);
ContextSampler finite(std::vector<Vector> support);
}  // namespace contexts

namespace values {
ValueSampler uniform(double lo = 0.0, double hi = 1.0);
ValueSampler point_mass(double v);
// clamp(<w, x> + U[-noise, noise], 0, 1)
ValueSampler linear_noisy(Vector w, double noise);
}  // namespace values

std::unique_ptr<Environment> env_iid(std::size_t d, ContextSampler context, ValueSampler value,
                                     const SeedTree& seeds);

// Contexts from a finite set of directions. The value on a direction is the last price posted
// on that direction minus `offset`, floored at 0; unseen directions get a uniform value.
std::unique_ptr<Environment> env_adaptive_tracker(std::size_t d, const SeedTree& seeds,
                                                  std::size_t directions = 8,
                                                  double offset = 0.05);

// Contexts rotate through the first two coordinates with the given period. Values follow a
// smooth cycle and drop by `penalty` after a round whose price exceeded 0.6.
std::unique_ptr<Environment> env_context_rotation(std::size_t d, std::size_t period,
                                                  const SeedTree& seeds, double penalty = 0.2);

}  // namespace omr
