#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace omr {

using Vector = std::vector<double>;

inline constexpr double kDefaultTolerance = 1e-9;

// Thrown when a search or enumeration would exceed its configured budget.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::uint64_t required, std::uint64_t cap)
      : std::runtime_error(what), required_(required), cap_(cap) {}
  std::uint64_t required() const { return required_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t required_;
  std::uint64_t cap_;
};

// Thrown when a party reads a quantity it is not allowed to observe.
class InformationLeak : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Party { None, Environment, Seller, Buyer };

Party current_party();

// Marks the calling thread as executing on behalf of a party until destroyed.
class PartyScope {
 public:
  explicit PartyScope(Party p);
  ~PartyScope();
  PartyScope(const PartyScope&) = delete;
  PartyScope& operator=(const PartyScope&) = delete;

 private:
  Party previous_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
double norm(std::span<const double> a);
// Scales v into the closed unit ball: v / max(1, ||v||).
Vector project_to_ball(std::span<const double> v);
void project_to_ball_inplace(Vector& v);

class ContextVector {
 public:
  // Throws std::invalid_argument unless ||coords|| is within tol of 1.
  static ContextVector make(Vector coords, double tol = kDefaultTolerance);
  // Rescales a nonzero vector to unit length.
  static ContextVector normalized(Vector coords);

  const Vector& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

 private:
  explicit ContextVector(Vector c) : coords_(std::move(c)) {}
  Vector coords_;
};

class WeightVector {
 public:
  // Throws std::invalid_argument if ||coords|| > 1 + tol.
  static WeightVector make(Vector coords, double tol = kDefaultTolerance);
  static WeightVector zero(std::size_t d);

  const Vector& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  double price(const ContextVector& x) const;

 private:
  explicit WeightVector(Vector c) : coords_(std::move(c)) {}
  Vector coords_;
};

// A buyer's bid. The environment may not read it.
class Bid {
 public:
  static Bid make(double b);
  double value() const;

 private:
  explicit Bid(double b) : b_(b) {}
  double b_;
};

// A buyer's private value. The seller may not read it.
class TrueValue {
 public:
  static TrueValue make(double theta);
  double value() const;

 private:
  explicit TrueValue(double t) : theta_(t) {}
  double theta_;
};

inline bool sells(double bid, double price, double tol = kDefaultTolerance) { return bid >= price - tol; }
inline double revenue_at(double price, double bid, double tol = kDefaultTolerance) {
  return sells(bid, price, tol) ? (price > 0.0 ? price : 0.0) : 0.0;
}
double utility_at(double theta, double price, double bid, double tol = kDefaultTolerance);

double revenue(const WeightVector& w, const ContextVector& x, const Bid& b,
               double tol = kDefaultTolerance);
double buyer_utility(const TrueValue& theta, double price, const Bid& b,
                     double tol = kDefaultTolerance);

// Assignment of rounds 1..T to buyers 1..n.
class RoundPartition {
 public:
  static RoundPartition make(std::vector<int> buyer_of_round, int buyers);
  static RoundPartition single(std::size_t horizon);
  static RoundPartition round_robin(std::size_t horizon, int buyers);
  static RoundPartition blocks(std::size_t horizon, int buyers);

  std::size_t horizon() const { return owner_.size(); }
  int buyers() const { return buyers_; }
  // t is 1-based.
  int buyer_of(std::size_t t) const { return owner_.at(t - 1); }
  const std::vector<std::size_t>& rounds_of(int buyer) const { return rounds_.at(buyer - 1); }

 private:
  std::vector<int> owner_;
  int buyers_ = 0;
  std::vector<std::vector<std::size_t>> rounds_;
};

class DiscountProfile {
 public:
  static DiscountProfile make(std::vector<double> gammas, double gamma_bar);
  static DiscountProfile uniform(int buyers, double gamma);

  double gamma(int buyer) const { return gammas_.at(buyer - 1); }
  double gamma_bar() const { return gamma_bar_; }
  int buyers() const { return static_cast<int>(gammas_.size()); }
  const std::vector<double>& gammas() const { return gammas_; }

 private:
  std::vector<double> gammas_;
  double gamma_bar_ = 0.0;
};

struct RoundTrace {
  std::size_t round = 0;
  int buyer = 0;
  ContextVector context = ContextVector::make({1.0});
  WeightVector weight = WeightVector::zero(1);
  double price = 0.0;
  Bid bid = Bid::make(0.0);
  TrueValue value = TrueValue::make(0.0);
  bool sold = false;
  // Seller internals, recorded for diagnostics only. -1 means not applicable.
  int omega = -1;
  int xi = -1;
  double lambda = -1.0;
  long long expert = -1;
};

double total_revenue(std::span<const RoundTrace> trace, double tol = kDefaultTolerance);
// Sum over the buyer's rounds of gamma^(t-1) * (theta - p) * 1[sold].
double discounted_utility(std::span<const RoundTrace> trace, int buyer,
                          const DiscountProfile& discount);

}  // namespace omr
