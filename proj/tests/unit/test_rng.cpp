#include <doctest.h>

#include <cmath>
#include <set>

#include "omr/core.hpp"
#include "omr/rng.hpp"

using namespace omr;

TEST_CASE("seed tree is deterministic and label sensitive") {
  SeedTree a(42), b(42);
  CHECK(a.child("seller-omega").seed() == b.child("seller-omega").seed());
  CHECK(a.child("seller-omega").seed() != a.child("seller-lambda").seed());
  CHECK(a.child("rep", 0).seed() != a.child("rep", 1).seed());
  CHECK(a.child("rep", 3).child("buyers").seed() == b.child("rep", 3).child("buyers").seed());
  Rng r1 = a.child("x").rng(), r2 = b.child("x").rng();
  for (int i = 0; i < 10; ++i) CHECK(r1() == r2());
}

TEST_CASE("indexed children do not collide") {
  std::set<std::uint64_t> seen;
  SeedTree root(7);
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(root.child("rep", i).seed());
  CHECK(seen.size() == 1000);
}

TEST_CASE("samplers stay in range") {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 20000 - 0.5) < 0.02);
  for (int i = 0; i < 200; ++i) {
    auto v = random_unit_vector(rng, 7);
    CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    auto w = random_in_ball(rng, 3);
    CHECK(norm(w) <= 1.0 + 1e-12);
  }
  CHECK_FALSE(bernoulli(rng, 0.0));
  CHECK(bernoulli(rng, 1.0));
}
