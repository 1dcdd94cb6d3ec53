#include "omr/rng.hpp"

#include <cmath>

namespace omr {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SeedTree SeedTree::child(std::string_view label) const {
  return SeedTree(splitmix64(seed_ ^ fnv1a(label)));
}

SeedTree SeedTree::child(std::string_view label, std::uint64_t index) const {
  return SeedTree(splitmix64(child(label).seed() + splitmix64(index)));
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

Vector random_unit_vector(Rng& rng, std::size_t d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vector v(d);
    for (double& c : v) c = gauss(rng);
    double n = norm(v);
    if (n < 1e-12) continue;
    for (double& c : v) c /= n;
    return v;
  }
}

Vector random_in_ball(Rng& rng, std::size_t d) {
  Vector v = random_unit_vector(rng, d);
  double r = std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
  for (double& c : v) c *= r;
  return v;
}

}  // namespace omr
