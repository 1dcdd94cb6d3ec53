#include <doctest.h>

#include <cmath>

#include "omr/core.hpp"
#include "omr/rng.hpp"

using namespace omr;

TEST_CASE("revenue of a single round") {
  auto x = ContextVector::make({1.0});
  CHECK(revenue(WeightVector::make({0.5}), x, Bid::make(0.6)) == doctest::Approx(0.5));
  CHECK(revenue(WeightVector::make({0.5}), x, Bid::make(0.4)) == 0.0);
  // Negative price sells but earns nothing.
  CHECK(revenue(WeightVector::make({-0.3}), x, Bid::make(0.0)) == 0.0);
  CHECK(sells(0.0, -0.3));
}

TEST_CASE("buyer utility of a single round") {
  CHECK(buyer_utility(TrueValue::make(0.8), 0.5, Bid::make(0.6)) == doctest::Approx(0.3));
  CHECK(buyer_utility(TrueValue::make(0.8), 0.5, Bid::make(0.4)) == 0.0);
  CHECK(buyer_utility(TrueValue::make(0.3), 0.5, Bid::make(0.6)) == doctest::Approx(-0.2));
}

TEST_CASE("sale tolerance") {
  CHECK(sells(0.5 - 1e-10, 0.5));
  CHECK_FALSE(sells(0.5 - 1e-8, 0.5));
  CHECK(revenue_at(0.5, 0.5 - 1e-10) == 0.5);
}

namespace {

RoundTrace row(std::size_t t, int buyer, double theta, double price, bool sold) {
  RoundTrace r;
  r.round = t;
  r.buyer = buyer;
  r.price = price;
  r.value = TrueValue::make(theta);
  r.bid = Bid::make(theta);
  r.sold = sold;
  return r;
}

}  // namespace

TEST_CASE("discounted utility") {
  std::vector<RoundTrace> trace = {row(1, 1, 0.9, 0.5, true), row(2, 1, 0.7, 0.5, true)};
  CHECK(discounted_utility(trace, 1, DiscountProfile::uniform(1, 0.5)) == doctest::Approx(0.5));
  CHECK(discounted_utility(trace, 1, DiscountProfile::uniform(1, 0.0)) == doctest::Approx(0.4));
  std::vector<RoundTrace> none = {row(1, 1, 0.3, 0.5, false), row(2, 1, 0.3, 0.5, false)};
  CHECK(discounted_utility(none, 1, DiscountProfile::uniform(1, 0.5)) == 0.0);
}

TEST_CASE("discounting uses the global round index") {
  // Buyer 2 owns round 2 only, so its utility is discounted once.
  std::vector<RoundTrace> trace = {row(1, 1, 0.9, 0.5, true), row(2, 2, 0.9, 0.5, true)};
  auto disc = DiscountProfile::uniform(2, 0.5);
  CHECK(discounted_utility(trace, 2, disc) == doctest::Approx(0.2));
  CHECK(total_revenue(trace) == doctest::Approx(1.0));
}

TEST_CASE("projection onto the unit ball") {
  auto a = project_to_ball(Vector{0.3, 0.4});
  CHECK(a[0] == doctest::Approx(0.3));
  CHECK(a[1] == doctest::Approx(0.4));
  auto b = project_to_ball(Vector{3.0, 4.0});
  CHECK(b[0] == doctest::Approx(0.6));
  CHECK(b[1] == doctest::Approx(0.8));
  auto c = project_to_ball(Vector{0.0, 0.0});
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.0);
}

TEST_CASE("strong types validate their domains") {
  CHECK_THROWS_AS(ContextVector::make({0.5, 0.5}), std::invalid_argument);
  CHECK_NOTHROW(ContextVector::make({0.6, 0.8}));
  CHECK_THROWS_AS(WeightVector::make({1.0, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(Bid::make(1.5), std::invalid_argument);
  CHECK_THROWS_AS(TrueValue::make(-0.1), std::invalid_argument);
  CHECK(ContextVector::normalized({3.0, 4.0})[1] == doctest::Approx(0.8));
}

TEST_CASE("information barrier") {
  auto theta = TrueValue::make(0.7);
  auto bid = Bid::make(0.6);
  {
    PartyScope scope(Party::Seller);
    CHECK_THROWS_AS(theta.value(), InformationLeak);
    CHECK(bid.value() == 0.6);
  }
  {
    PartyScope scope(Party::Environment);
    CHECK_THROWS_AS(bid.value(), InformationLeak);
    CHECK(theta.value() == 0.7);
  }
  CHECK(current_party() == Party::None);
  CHECK(theta.value() == 0.7);
}

TEST_CASE("round partitions") {
  auto rr = RoundPartition::round_robin(5, 2);
  CHECK(rr.buyer_of(1) == 1);
  CHECK(rr.buyer_of(2) == 2);
  CHECK(rr.buyer_of(5) == 1);
  CHECK(rr.rounds_of(2) == std::vector<std::size_t>{2, 4});
  auto bl = RoundPartition::blocks(5, 2);
  CHECK(bl.buyer_of(3) == 1);
  CHECK(bl.buyer_of(4) == 2);
  CHECK_THROWS(RoundPartition::make({1, 3}, 2));
  CHECK_THROWS(DiscountProfile::make({0.6}, 0.5));
}

TEST_CASE("revenue and sale properties on random rounds") {
  Rng rng(11);
  for (int k = 0; k < 2000; ++k) {
    double p = 2.0 * uniform01(rng) - 1.0;
    double b = uniform01(rng);
    double theta = uniform01(rng);
    double r = revenue_at(p, b);
    CHECK(r >= 0.0);
    CHECK(r <= std::max(p, 0.0));
    CHECK((r > 0.0) == (p > 0.0 && b >= p - kDefaultTolerance));
    // Truthful bidding never loses to any other bid at a posted price.
    CHECK(utility_at(theta, p, theta) >= utility_at(theta, p, b) - 1e-12);
  }
}
