#include "omr/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace omr {

namespace {

class FixedEnvironment final : public Environment {
 public:
  explicit FixedEnvironment(std::vector<EnvironmentDraw> seq) : seq_(std::move(seq)) {}

  EnvironmentDraw emit(const EnvironmentView& view) override {
    if (view.round == 0 || view.round > seq_.size())
      throw std::out_of_range("fixed environment exhausted");
    return seq_[view.round - 1];
  }
  std::size_t dimension() const override { return seq_.empty() ? 0 : seq_.front().context.dim(); }
  std::string id() const override { return "fixed"; }

 private:
  std::vector<EnvironmentDraw> seq_;
};

class IidEnvironment final : public Environment {
 public:
  IidEnvironment(std::size_t d, ContextSampler c, ValueSampler v, const SeedTree& seeds)
      : d_(d), context_(std::move(c)), value_(std::move(v)), rng_(seeds.rng()) {}

  EnvironmentDraw emit(const EnvironmentView&) override {
    Vector x = context_(rng_);
    if (x.size() != d_) throw std::logic_error("context sampler returned the wrong dimension");
    double v = std::clamp(value_(x, rng_), 0.0, 1.0);
    return {ContextVector::make(std::move(x), 1e-9), TrueValue::make(v)};
  }
  std::size_t dimension() const override { return d_; }
  std::string id() const override { return "iid"; }

 private:
  std::size_t d_;
  ContextSampler context_;
  ValueSampler value_;
  Rng rng_;
};

class TrackerEnvironment final : public Environment {
 public:
  TrackerEnvironment(std::size_t d, const SeedTree& seeds, std::size_t directions, double offset)
      : d_(d), offset_(offset), rng_(seeds.rng()) {
    if (d == 0 || directions == 0) throw std::invalid_argument("tracker needs d > 0 and directions");
    if (d == 1) {
      dirs_ = {{1.0}, {-1.0}};
    } else {
      Rng setup = seeds.child("directions").rng();
      for (std::size_t k = 0; k < directions; ++k) dirs_.push_back(random_unit_vector(setup, d));
    }
  }

  EnvironmentDraw emit(const EnvironmentView& view) override {
    std::size_t k = static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(dirs_.size()));
    k = std::min(k, dirs_.size() - 1);
    double fresh = uniform01(rng_);
    const Vector& x = dirs_[k];
    double value = fresh;
    for (auto it = view.history.rbegin(); it != view.history.rend(); ++it) {
      if (it->context.coords() == x) {
        value = std::max(0.0, it->price - offset_);
        break;
      }
    }
    return {ContextVector::make(x, 1e-9), TrueValue::make(std::clamp(value, 0.0, 1.0))};
  }
  std::size_t dimension() const override { return d_; }
  std::string id() const override { return "tracker"; }

 private:
  std::size_t d_;
  double offset_;
  Rng rng_;
  std::vector<Vector> dirs_;
};

class RotationEnvironment final : public Environment {
 public:
  RotationEnvironment(std::size_t d, std::size_t period, const SeedTree& seeds, double penalty)
      : d_(d), period_(period), penalty_(penalty), rng_(seeds.rng()) {
    if (d == 0 || period == 0) throw std::invalid_argument("rotation needs d > 0 and period > 0");
    phase_ = uniform01(rng_);
  }

  EnvironmentDraw emit(const EnvironmentView& view) override {
    double angle = 2.0 * std::numbers::pi *
                   (static_cast<double>(view.round - 1) / static_cast<double>(period_) + phase_);
    Vector x(d_, 0.0);
    if (d_ == 1) {
      x[0] = std::cos(angle) >= 0.0 ? 1.0 : -1.0;
    } else {
      x[0] = std::cos(angle);
      x[1] = std::sin(angle);
    }
    double value = 0.5 + 0.35 * std::sin(3.0 * angle) + 0.1 * (uniform01(rng_) - 0.5);
    if (!view.history.empty() && view.history.back().price > 0.6) value -= penalty_;
    return {ContextVector::normalized(std::move(x)), TrueValue::make(std::clamp(value, 0.0, 1.0))};
  }
  std::size_t dimension() const override { return d_; }
  std::string id() const override { return "rotation"; }

 private:
  std::size_t d_;
  std::size_t period_;
  double penalty_;
  Rng rng_;
  double phase_ = 0.0;
};

}  // namespace

std::unique_ptr<Environment> env_fixed(std::vector<FixedRound> sequence, double tol) {
  std::vector<EnvironmentDraw> seq;
  seq.reserve(sequence.size());
  std::size_t d = sequence.empty() ? 0 : sequence.front().context.size();
  for (auto& r : sequence) {
    if (r.context.size() != d) throw std::invalid_argument("fixed sequence mixes dimensions");
    seq.push_back({ContextVector::make(std::move(r.context), tol), TrueValue::make(r.value)});
  }
  return std::make_unique<FixedEnvironment>(std::move(seq));
}

namespace contexts {

ContextSampler uniform_sphere(std::size_t d) {
  return [d](Rng& rng) { return random_unit_vector(rng, d); };
}

ContextSampler point_mass(Vector x) {
  ContextVector::make(x, 1e-9);
  return [x = std::move(x)](Rng&) { return x; };
}

ContextSampler finite(std::vector<Vector> support) {
  if (support.empty()) throw std::invalid_argument("finite context distribution needs support");
  for (const auto& x : support) ContextVector::make(x, 1e-9);
  return [s = std::move(support)](Rng& rng) {
    std::size_t k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(s.size()));
    return s[std::min(k, s.size() - 1)];
  };
}

}  // namespace contexts

namespace values {

ValueSampler uniform(double lo, double hi) {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) throw std::invalid_argument("bad value range");
  return [lo, hi](const Vector&, Rng& rng) { return lo + (hi - lo) * uniform01(rng); };
}

ValueSampler point_mass(double v) {
  TrueValue::make(v);
  return [v](const Vector&, Rng&) { return v; };
}

ValueSampler linear_noisy(Vector w, double noise) {
  WeightVector::make(w);
  return [w = std::move(w), noise](const Vector& x, Rng& rng) {
    return std::clamp(dot(w, x) + noise * (2.0 * uniform01(rng) - 1.0), 0.0, 1.0);
  };
}

}  // namespace values

std::unique_ptr<Environment> env_iid(std::size_t d, ContextSampler context, ValueSampler value,
                                     const SeedTree& seeds) {
  return std::make_unique<IidEnvironment>(d, std::move(context), std::move(value), seeds);
}

std::unique_ptr<Environment> env_adaptive_tracker(std::size_t d, const SeedTree& seeds,
                                                  std::size_t directions, double offset) {
  return std::make_unique<TrackerEnvironment>(d, seeds, directions, offset);
}

std::unique_ptr<Environment> env_context_rotation(std::size_t d, std::size_t period,
                                                  const SeedTree& seeds, double penalty) {
  return std::make_unique<RotationEnvironment>(d, period, seeds, penalty);
}

}  // namespace omr
