#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "omr/core.hpp"

namespace omr {

using Rng = std::mt19937_64;

// Deterministic hierarchy of seeds. Children are derived from the parent seed and a label,
// so adding a new consumer never shifts the streams of existing ones.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t master) : seed_(master) {}
  std::uint64_t seed() const { return seed_; }
  SeedTree child(std::string_view label) const;
  SeedTree child(std::string_view label, std::uint64_t index) const;
  Rng rng() const { return Rng(seed_); }

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view s);

// Uniform on [0, 1) with 53 random bits.
double uniform01(Rng& rng);
bool bernoulli(Rng& rng, double p);
Vector random_unit_vector(Rng& rng, std::size_t d);
// Uniform in the closed unit ball.
Vector random_in_ball(Rng& rng, std::size_t d);

}  // namespace omr
