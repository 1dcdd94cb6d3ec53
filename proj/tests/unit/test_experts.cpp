#include <doctest.h>

#include <cmath>

#include "omr/experts.hpp"
#include "omr/rng.hpp"

using namespace omr;

TEST_CASE("hedge starts uniform") {
  Hedge h(4, 10);
  for (double p : h.distribution()) CHECK(p == doctest::Approx(0.25));
  Hedge one(1, 10);
  CHECK(one.distribution() == std::vector<double>{1.0});
  CHECK(one.choose(0.99) == 0);
  CHECK_THROWS_AS(Hedge(4, 0), std::invalid_argument);
  CHECK(Hedge(4, 100).learning_rate() == doctest::Approx(std::sqrt(8.0 * std::log(4.0) / 100.0)));
}

TEST_CASE("hedge updates") {
  Hedge h(3, 10);
  auto before = h.distribution();
  h.update(std::vector<double>{0.4, 0.4, 0.4});
  auto after = h.distribution();
  for (int k = 0; k < 3; ++k) CHECK(after[k] == doctest::Approx(before[k]));
  h.update(std::vector<double>{0.0, 0.0, 0.0});
  CHECK(h.distribution() == after);

  Hedge two(2, 10, 1.0);
  two.update(std::vector<double>{1.0, 0.0});
  auto p = two.distribution();
  CHECK(p[0] / p[1] == doctest::Approx(std::exp(1.0)));
  CHECK_THROWS(two.update(std::vector<double>{1.5, 0.0}));
  CHECK_THROWS(two.update(std::vector<double>{1.0}));
}

TEST_CASE("hedge sampling follows its distribution") {
  Hedge h(2, 10, 1.0);
  h.update(std::vector<double>{1.0, 0.0});
  double p0 = h.distribution()[0];
  CHECK(h.choose(p0 - 1e-9) == 0);
  CHECK(h.choose(p0 + 1e-9) == 1);
  CHECK(h.choose(0.0) == 0);
}

TEST_CASE("hedge survives long runs without overflow") {
  Hedge h(3, 100000, 1.0);
  for (int t = 0; t < 5000; ++t) h.update(std::vector<double>{1.0, 0.5, 0.0});
  auto p = h.distribution();
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(std::isfinite(p[2]));
  CHECK(h.choose(0.999999) == 0);
}

TEST_CASE("hedge expected regret stays below its bound") {
  Rng rng(17);
  for (std::size_t K : {2u, 8u, 64u}) {
    const std::size_t T = 2000;
    Hedge h(K, T);
    std::vector<double> totals(K, 0.0), r(K);
    double earned = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      auto p = h.distribution();
      // Reward the currently least likely expert: an adaptive adversary.
      std::size_t worst = 0;
      for (std::size_t k = 1; k < K; ++k)
        if (p[k] < p[worst]) worst = k;
      for (std::size_t k = 0; k < K; ++k) r[k] = k == worst ? 1.0 : 0.3 * uniform01(rng);
      for (std::size_t k = 0; k < K; ++k) {
        earned += p[k] * r[k];
        totals[k] += r[k];
      }
      h.update(r);
    }
    double best = *std::max_element(totals.begin(), totals.end());
    CHECK(best - earned <= Hedge::regret_bound(K, T));
  }
}

TEST_CASE("follow the leader breaks ties low") {
  FollowTheLeader f(3);
  CHECK(f.choose(0.9) == 0);
  f.update(std::vector<double>{0.0, 1.0, 1.0});
  CHECK(f.choose(0.1) == 1);
  f.update(std::vector<double>{0.0, 0.0, 0.5});
  CHECK(f.choose(0.1) == 2);
}

TEST_CASE("sparse wrapper with an open gate equals the inner learner") {
  Rng rng(2);
  Hedge plain(5, 100);
  SparseExpert wrapped(std::make_unique<Hedge>(5, 100), SparseGate::scripted(std::vector<bool>(100, true), 1.0));
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r(5);
    for (double& x : r) x = uniform01(rng);
    plain.update(r);
    wrapped.update(r);
    CHECK(plain.distribution() == wrapped.distribution());
  }
}

TEST_CASE("sparse wrapper forwards only gated rounds") {
  SparseExpert wrapped(std::make_unique<Hedge>(2, 3, 1.0), SparseGate::scripted({true, false, true}, 0.5));
  Hedge manual(2, 3, 1.0);
  std::vector<std::vector<double>> r = {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.2}};
  for (int t = 0; t < 3; ++t) {
    CHECK(wrapped.next_coin() == (t != 1));
    wrapped.update(r[t]);
    manual.update(t == 1 ? std::vector<double>{0.0, 0.0} : r[t]);
  }
  CHECK(wrapped.distribution() == manual.distribution());
  CHECK_THROWS(wrapped.update(r[0]));
  CHECK_THROWS(SparseGate::scripted({true}, 1.5));
  Rng rng(1);
  CHECK_THROWS(SparseGate::draw(0.0, 10, rng));
}

TEST_CASE("sparse gate frequency") {
  Rng rng(8);
  const double rho = 0.3;
  auto g = SparseGate::draw(rho, 10000, rng);
  double n = 0;
  for (bool c : g.coins) n += c;
  CHECK(std::abs(n - rho * 10000) <= 5.0 * std::sqrt(10000 * rho * (1 - rho)));
}

TEST_CASE("expert regret") {
  std::vector<ExpertRound> same = {{0, {0.5, 0.5}}, {1, {0.2, 0.2}}};
  CHECK(expert_regret(same) == 0.0);
  std::vector<ExpertRound> worst = {{1, {1.0, 0.0}}, {1, {1.0, 0.0}}};
  CHECK(expert_regret(worst) == 2.0);
  std::vector<ExpertRound> best = {{0, {1.0, 0.0}}, {0, {1.0, 0.0}}};
  CHECK(expert_regret(best) == 0.0);
}
