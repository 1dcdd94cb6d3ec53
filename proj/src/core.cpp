#include "omr/core.hpp"

#include <algorithm>
#include <cmath>

namespace omr {

namespace {
thread_local Party g_party = Party::None;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Party current_party() { return g_party; }

PartyScope::PartyScope(Party p) : previous_(g_party) { g_party = p; }
PartyScope::~PartyScope() { g_party = previous_; }

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void project_to_ball_inplace(Vector& v) {
  double n = norm(v);
  if (n > 1.0)
    for (double& c : v) c /= n;
}

Vector project_to_ball(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  project_to_ball_inplace(out);
  return out;
}

ContextVector ContextVector::make(Vector coords, double tol) {
  require(!coords.empty(), "context must have positive dimension");
  for (double c : coords) require(std::isfinite(c), "context has non-finite entry");
  require(std::abs(norm(coords) - 1.0) <= tol, "context must have unit norm");
  return ContextVector(std::move(coords));
}

ContextVector ContextVector::normalized(Vector coords) {
  double n = norm(coords);
  require(n > 0.0 && std::isfinite(n), "cannot normalize a zero vector");
  for (double& c : coords) c /= n;
  return ContextVector(std::move(coords));
}

WeightVector WeightVector::make(Vector coords, double tol) {
  require(!coords.empty(), "weight must have positive dimension");
  for (double c : coords) require(std::isfinite(c), "weight has non-finite entry");
  require(norm(coords) <= 1.0 + tol, "weight must lie in the unit ball");
  return WeightVector(std::move(coords));
}

WeightVector WeightVector::zero(std::size_t d) {
  require(d > 0, "weight must have positive dimension");
  return WeightVector(Vector(d, 0.0));
}

double WeightVector::price(const ContextVector& x) const { return dot(coords_, x.coords()); }

Bid Bid::make(double b) {
  require(std::isfinite(b) && b >= 0.0 && b <= 1.0, "bid must lie in [0, 1]");
  return Bid(b);
}

double Bid::value() const {
  if (g_party == Party::Environment) throw InformationLeak("environment attempted to read a bid");
  return b_;
}

TrueValue TrueValue::make(double theta) {
  require(std::isfinite(theta) && theta >= 0.0 && theta <= 1.0, "value must lie in [0, 1]");
  return TrueValue(theta);
}

double TrueValue::value() const {
  if (g_party == Party::Seller) throw InformationLeak("seller attempted to read a true value");
  return theta_;
}


double utility_at(double theta, double price, double bid, double tol) {
  return sells(bid, price, tol) ? theta - price : 0.0;
}

double revenue(const WeightVector& w, const ContextVector& x, const Bid& b, double tol) {
  return revenue_at(w.price(x), b.value(), tol);
}

double buyer_utility(const TrueValue& theta, double price, const Bid& b, double tol) {
  return utility_at(theta.value(), price, b.value(), tol);
}

RoundPartition RoundPartition::make(std::vector<int> buyer_of_round, int buyers) {
  require(buyers >= 1, "need at least one buyer");
  RoundPartition p;
  p.buyers_ = buyers;
  p.rounds_.assign(buyers, {});
  for (std::size_t t = 0; t < buyer_of_round.size(); ++t) {
    int b = buyer_of_round[t];
    require(b >= 1 && b <= buyers, "round assigned to unknown buyer");
    p.rounds_[b - 1].push_back(t + 1);
  }
  p.owner_ = std::move(buyer_of_round);
  return p;
}

RoundPartition RoundPartition::single(std::size_t horizon) {
  return make(std::vector<int>(horizon, 1), 1);
}

RoundPartition RoundPartition::round_robin(std::size_t horizon, int buyers) {
  require(buyers >= 1, "need at least one buyer");
  std::vector<int> owner(horizon);
  for (std::size_t t = 0; t < horizon; ++t) owner[t] = static_cast<int>(t % buyers) + 1;
  return make(std::move(owner), buyers);
}

RoundPartition RoundPartition::blocks(std::size_t horizon, int buyers) {
  require(buyers >= 1, "need at least one buyer");
  std::vector<int> owner(horizon);
  for (std::size_t t = 0; t < horizon; ++t)
    owner[t] = static_cast<int>(t * buyers / std::max<std::size_t>(horizon, 1)) + 1;
  return make(std::move(owner), buyers);
}

DiscountProfile DiscountProfile::make(std::vector<double> gammas, double gamma_bar) {
  require(!gammas.empty(), "need at least one discount factor");
  require(gamma_bar >= 0.0 && gamma_bar < 1.0, "gamma_bar must lie in [0, 1)");
  for (double g : gammas) require(g >= 0.0 && g <= gamma_bar, "gamma_i must lie in [0, gamma_bar]");
  DiscountProfile d;
  d.gammas_ = std::move(gammas);
  d.gamma_bar_ = gamma_bar;
  return d;
}

DiscountProfile DiscountProfile::uniform(int buyers, double gamma) {
  require(buyers >= 1, "need at least one buyer");
  return make(std::vector<double>(buyers, gamma), gamma);
}

double total_revenue(std::span<const RoundTrace> trace, double tol) {
  double s = 0.0;
  for (const auto& r : trace) s += revenue_at(r.price, r.bid.value(), tol);
  return s;
}

double discounted_utility(std::span<const RoundTrace> trace, int buyer,
                          const DiscountProfile& discount) {
  double g = discount.gamma(buyer);
  double s = 0.0;
  for (const auto& r : trace) {
    if (r.buyer != buyer || !r.sold) continue;
    s += std::pow(g, static_cast<double>(r.round - 1)) * (r.value.value() - r.price);
  }
  return s;
}

}  // namespace omr
