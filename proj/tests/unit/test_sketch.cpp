#include <doctest.h>

#include <cmath>
#include <functional>

#include "omr/core.hpp"
#include "omr/rng.hpp"
#include "omr/sketch.hpp"

using namespace omr;

namespace {

Sketch make_sketch(std::vector<std::size_t> support, std::vector<std::int64_t> mult, double step) {
  Sketch z;
  z.epsilon = 0.5;
  z.step = step;
  z.support = std::move(support);
  z.multipliers = std::move(mult);
  return z;
}

// Direct count: choose each round's coefficient (zero or nonzero) with a support limit.
std::uint64_t brute_count(std::size_t T, std::uint64_t levels, std::size_t smax) {
  std::function<std::uint64_t(std::size_t, std::size_t)> go = [&](std::size_t t, std::size_t used) {
    if (t == T) return std::uint64_t{1};
    std::uint64_t n = go(t + 1, used);
    if (used < smax) n += levels * go(t + 1, used + 1);
    return n;
  };
  return go(0, 0);
}

}  // namespace

TEST_CASE("reconstruct") {
  auto e1 = ContextVector::make({1.0, 0.0});
  std::vector<ContextVector> xs = {e1};
  auto empty = reconstruct(make_sketch({}, {}, 0.5), xs);
  CHECK(empty.coords() == Vector{0.0, 0.0});
  auto one = reconstruct(make_sketch({1}, {2}, 0.5), xs);
  CHECK(one.coords()[0] == doctest::Approx(1.0));
  auto two = reconstruct(make_sketch({1}, {4}, 0.5), xs);
  CHECK(two.coords()[0] == doctest::Approx(1.0));
  CHECK(two.coords()[1] == 0.0);
}

TEST_CASE("lazy projected gradient steps") {
  auto s = LazyOgdState::init(3, 0.1);
  s = lazy_ogd_step(s, Vector{1.0, 0.0, 0.0});
  CHECK(s.u[0] == doctest::Approx(-0.1));
  CHECK(s.v[0] == doctest::Approx(-0.1));
  auto t = lazy_ogd_step(s, Vector{0.0, 0.0, 0.0});
  CHECK(t.u == s.u);
  CHECK(t.updates == s.updates + 1);

  auto r = LazyOgdState::init(3, 0.2);
  for (int i = 0; i < 10; ++i) r = lazy_ogd_step(r, Vector{1.0, 0.0, 0.0});
  CHECK(r.u[0] == doctest::Approx(-2.0));
  CHECK(r.v[0] == doctest::Approx(-1.0));
  CHECK_THROWS(lazy_ogd_step(r, Vector{1.0, 1.0, 0.0}));
}

TEST_CASE("online sketch of the zero weight is empty") {
  Rng rng(1);
  OnlineSketcher s(Vector(4, 0.0), 0.3);
  for (int t = 0; t < 50; ++t) {
    auto v = s.step(ContextVector::make(random_unit_vector(rng, 4)));
    CHECK(norm(v) == 0.0);
  }
  CHECK(s.sketch().empty());
  CHECK(s.updates() == 0);
}

TEST_CASE("online sketch, one dimension worked example") {
  OnlineSketcher s({0.5}, 0.5);
  auto x = ContextVector::make({1.0});
  auto v = s.step(x);
  CHECK(v[0] == doctest::Approx(0.375));
  CHECK(s.updates() == 12);
  auto z = s.sketch();
  REQUIRE(z.support.size() == 1);
  CHECK(z.support[0] == 1);
  CHECK(z.multipliers[0] == 12);
  CHECK(z.step == 0.03125);
  for (int t = 0; t < 20; ++t) s.step(x);
  CHECK(s.updates() == 12);
}

TEST_CASE("online sketch, alternating contexts") {
  const double eps = 0.3;
  OnlineSketcher s({0.9}, eps);
  std::vector<ContextVector> xs;
  std::vector<Vector> online;
  for (int t = 0; t < 200; ++t) {
    xs.push_back(ContextVector::make({t % 2 == 0 ? 1.0 : -1.0}));
    online.push_back(s.step(xs.back()));
  }
  auto z = s.sketch();
  CHECK(update_count(z) <= 178);
  validate(z, SketchGrid::for_epsilon(eps));
  for (std::size_t t = 1; t <= xs.size(); ++t) {
    auto v = reconstruct(z, std::span(xs).first(t));
    CHECK(v.coords() == online[t - 1]);
    CHECK(std::abs(dot(v.coords(), xs[t - 1].coords()) - 0.9 * xs[t - 1][0]) <= eps * eps);
  }
}

TEST_CASE("online sketch matches reconstruct on random instances") {
  const double eps = 0.3;
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Vector w = random_in_ball(rng, 10);
    std::vector<ContextVector> xs;
    for (int t = 0; t < 200; ++t) xs.push_back(ContextVector::make(random_unit_vector(rng, 10)));
    auto z = construct_sketch(WeightVector::make(w), xs, eps);
    // The lazy OGD argument gives eps^2 M / 4 <= 4 / eps^2; 16 / eps^2 can be exceeded here.
    CHECK(static_cast<double>(update_count(z)) <= 16.0 / std::pow(eps, 4));
    OnlineSketcher s(w, eps);
    for (std::size_t t = 1; t <= xs.size(); ++t) {
      auto online = s.step(xs[t - 1]);
      auto v = reconstruct(z, std::span(xs).first(t));
      CHECK(v.coords() == online);
      CHECK(std::abs(dot(v.coords(), xs[t - 1].coords()) - dot(w, xs[t - 1].coords())) <= eps * eps / 2.0 + 1e-12);
    }
  }
}

TEST_CASE("sketch set counts") {
  auto g1 = SketchGrid::custom(0.5, 1, 1);
  CHECK(count_sketch_set(1, g1) == 4);
  CHECK(enumerate_sketch_set(1, 0.5, g1, 100).size() == 4);
  auto g2 = SketchGrid::custom(0.5, 1, 2);
  CHECK(count_sketch_set(2, g2) == 16);
  CHECK(enumerate_sketch_set(2, 0.5, g2, 100).size() == 16);
  CHECK(count_sketch_set(5, SketchGrid::custom(0.5, 3, 0)) == 1);
  for (std::size_t T = 1; T <= 6; ++T)
    for (std::int64_t m = 1; m <= 3; ++m)
      for (std::size_t s = 0; s <= T; ++s)
        CHECK(count_sketch_set(T, SketchGrid::custom(0.25, m, s)) == brute_count(T, 2 * m + 1, s));
}

TEST_CASE("sketch set enumeration order and validity") {
  auto grid = SketchGrid::custom(0.5, 1, 2);
  auto all = enumerate_sketch_set(2, 0.5, grid, 100);
  CHECK(all[0].empty());
  CHECK(all[1].support == std::vector<std::size_t>{1});
  CHECK(all[1].multipliers == std::vector<std::int64_t>{-1});
  // Supports in lexicographic order: {}, {1}, {1,2}, {2}.
  CHECK(all[12].support == std::vector<std::size_t>{1, 2});
  CHECK(all[12].multipliers == std::vector<std::int64_t>{1, 1});
  CHECK(all.back().support == std::vector<std::size_t>{2});
  CHECK(all.back().multipliers == std::vector<std::int64_t>{1});
  for (const auto& z : all) CHECK_NOTHROW(validate(z, grid));
}

TEST_CASE("full sketch set is too large at moderate horizon") {
  auto grid = SketchGrid::for_epsilon(0.5);
  CHECK(grid.max_multiplier == 64);
  CHECK_THROWS_AS(enumerate_sketch_set(20, 0.5, grid, 1000000), CapExceeded);
}

TEST_CASE("validate rejects malformed sketches") {
  auto grid = SketchGrid::custom(0.5, 2, 2);
  CHECK_THROWS(validate(make_sketch({2, 1}, {1, 1}, 0.5), grid));
  CHECK_THROWS(validate(make_sketch({1}, {3}, 0.5), grid));
  CHECK_THROWS(validate(make_sketch({1, 2, 3}, {1, 1, 1}, 0.5), grid));
  CHECK_THROWS(validate(make_sketch({0}, {1}, 0.5), grid));
}

TEST_CASE("exact bank prices agree with reconstruct") {
  auto sketches = enumerate_sketch_set(3, 0.5, SketchGrid::custom(0.5, 2, 2), 10000);
  SketchSetBank bank(sketches, 2);
  Rng rng(9);
  std::vector<ContextVector> xs;
  for (int t = 0; t < 3; ++t) {
    xs.push_back(ContextVector::make(random_unit_vector(rng, 2)));
    bank.advance(xs.back());
    for (std::size_t k = 0; k < bank.size(); ++k) {
      auto v = reconstruct(sketches[k], xs);
      CHECK(bank.weight(k) == v.coords());
      CHECK(bank.price(k) == dot(v.coords(), xs.back().coords()));
    }
  }
}
