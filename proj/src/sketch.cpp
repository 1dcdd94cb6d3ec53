#include "omr/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omr {

namespace {

std::size_t support_bound(double epsilon) {
  return static_cast<std::size_t>(std::ceil(16.0 / (epsilon * epsilon) - 1e-9));
}

// acc += c * x, in the order shared by every reconstruction path.
void accumulate(Vector& acc, double c, const Vector& x) {
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += c * x[j];
}

std::optional<std::uint64_t> mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::nullopt;
  return a * b;
}

}  // namespace

SketchGrid SketchGrid::for_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  SketchGrid g;
  g.step = epsilon * epsilon / 8.0;
  g.max_multiplier = static_cast<std::int64_t>(std::floor(2.0 / g.step + 1e-9));
  g.max_support = support_bound(epsilon);
  return g;
}

SketchGrid SketchGrid::custom(double step, std::int64_t max_multiplier, std::size_t max_support) {
  if (!(step > 0.0) || max_multiplier < 1)
    throw std::invalid_argument("grid needs a positive step and multiplier bound");
  SketchGrid g;
  g.step = step;
  g.max_multiplier = max_multiplier;
  g.max_support = max_support;
  g.overridden = true;
  return g;
}

void validate(const Sketch& z, const SketchGrid& grid) {
  if (z.support.size() != z.multipliers.size())
    throw std::invalid_argument("sketch support and multipliers differ in length");
  if (z.support.size() > grid.max_support) throw std::invalid_argument("sketch support too large");
  if (z.step != grid.step) throw std::invalid_argument("sketch step does not match grid");
  for (std::size_t i = 0; i < z.support.size(); ++i) {
    if (z.support[i] == 0) throw std::invalid_argument("sketch rounds are 1-based");
    if (i > 0 && z.support[i] <= z.support[i - 1])
      throw std::invalid_argument("sketch support must be strictly increasing");
    if (std::llabs(z.multipliers[i]) > grid.max_multiplier)
      throw std::invalid_argument("sketch multiplier out of range");
  }
}

std::uint64_t update_count(const Sketch& z) {
  std::uint64_t m = 0;
  for (auto k : z.multipliers) m += static_cast<std::uint64_t>(std::llabs(k));
  return m;
}

WeightVector reconstruct(const Sketch& z, std::span<const ContextVector> prefix) {
  if (prefix.empty()) throw std::invalid_argument("reconstruct needs at least one context");
  std::size_t d = prefix[0].dim();
  Vector acc(d, 0.0);
  for (std::size_t i = 0; i < z.support.size() && z.support[i] <= prefix.size(); ++i)
    accumulate(acc, z.coefficient(i), prefix[z.support[i] - 1].coords());
  project_to_ball_inplace(acc);
  return WeightVector::make(std::move(acc), 1e-12);
}

OnlineSketcher::OnlineSketcher(Vector target, double epsilon)
    : target_(std::move(target)),
      epsilon_(epsilon),
      step_(epsilon * epsilon / 8.0),
      iteration_cap_(10 * support_bound(epsilon)),
      base_(target_.size(), 0.0) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (norm(target_) > 1.0 + kDefaultTolerance)
    throw std::invalid_argument("target weight must lie in the unit ball");
}

Vector OnlineSketcher::step(const ContextVector& x) {
  if (x.dim() != target_.size()) throw std::invalid_argument("context dimension mismatch");
  ++round_;
  const Vector& xs = x.coords();
  const double goal = dot(target_, xs);
  const double threshold = epsilon_ * epsilon_ / 2.0;
  std::int64_t k = 0;
  Vector v = base_;
  project_to_ball_inplace(v);
  std::size_t iterations = 0;
  for (;;) {
    double h = dot(v, xs) - goal;
    if (std::abs(h) <= threshold) break;
    if (++iterations > iteration_cap_)
      throw std::logic_error("online sketch failed to converge within the iteration cap");
    k += h >= 0.0 ? -1 : 1;
    v = base_;
    accumulate(v, static_cast<double>(k) * step_, xs);
    project_to_ball_inplace(v);
  }
  if (k != 0) {
    accumulate(base_, static_cast<double>(k) * step_, xs);
    support_.push_back(round_);
    multipliers_.push_back(k);
    updates_ += static_cast<std::uint64_t>(std::llabs(k));
  }
  return v;
}

Sketch OnlineSketcher::sketch() const {
  Sketch z;
  z.epsilon = epsilon_;
  z.step = step_;
  z.support = support_;
  z.multipliers = multipliers_;
  return z;
}

Sketch construct_sketch(const WeightVector& w, std::span<const ContextVector> contexts,
                        double epsilon) {
  OnlineSketcher s(w.coords(), epsilon);
  for (const auto& x : contexts) s.step(x);
  return s.sketch();
}

std::optional<std::uint64_t> count_sketch_set(std::size_t horizon, const SketchGrid& grid) {
  const std::size_t smax = std::min(horizon, grid.max_support);
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(T, s)
  std::uint64_t power = 1;  // G^s
  for (std::size_t s = 0; s <= smax; ++s) {
    if (s > 0) {
      // C(T, s - 1) * (T - s + 1) is divisible by s.
      unsigned __int128 wide = static_cast<unsigned __int128>(binom) * (horizon - s + 1) / s;
      if (wide > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
      binom = static_cast<std::uint64_t>(wide);
      auto p = mul_sat(power, grid.levels());
      if (!p) return std::nullopt;
      power = *p;
    }
    auto term = mul_sat(binom, power);
    if (!term) return std::nullopt;
    if (*term > std::numeric_limits<std::uint64_t>::max() - total) return std::nullopt;
    total += *term;
  }
  return total;
}

std::vector<Sketch> enumerate_sketch_set(std::size_t horizon, double epsilon,
                                         const SketchGrid& grid, std::uint64_t cap) {
  auto count = count_sketch_set(horizon, grid);
  if (!count || *count > cap)
    throw CapExceeded("sketch set exceeds the enumeration cap",
                      count ? *count : std::numeric_limits<std::uint64_t>::max(), cap);
  std::vector<Sketch> out;
  out.reserve(*count);
  const std::size_t smax = std::min(horizon, grid.max_support);
  const std::int64_t m = grid.max_multiplier;

  std::vector<std::size_t> support;
  auto emit_all = [&](const std::vector<std::size_t>& s) {
    std::vector<std::int64_t> k(s.size(), -m);
    for (;;) {
      Sketch z;
      z.epsilon = epsilon;
      z.step = grid.step;
      z.support = s;
      z.multipliers = k;
      out.push_back(std::move(z));
      // Odometer, last position fastest.
      std::size_t i = k.size();
      for (;;) {
        if (i == 0) return;
        --i;
        if (++k[i] <= m) break;
        k[i] = -m;
      }
    }
  };

  auto dfs = [&](auto&& self, std::size_t next) -> void {
    emit_all(support);
    if (support.size() == smax) return;
    for (std::size_t tau = next; tau <= horizon; ++tau) {
      support.push_back(tau);
      self(self, tau + 1);
      support.pop_back();
    }
  };
  dfs(dfs, 1);
  return out;
}

LazyOgdState LazyOgdState::init(std::size_t d, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("lazy OGD step must be positive");
  LazyOgdState s;
  s.u.assign(d, 0.0);
  s.v.assign(d, 0.0);
  s.step = step;
  return s;
}

LazyOgdState lazy_ogd_step(LazyOgdState state, std::span<const double> g) {
  if (g.size() != state.u.size()) throw std::invalid_argument("subgradient dimension mismatch");
  if (norm(g) > 1.0 + kDefaultTolerance) throw std::invalid_argument("subgradient norm exceeds 1");
  for (std::size_t j = 0; j < g.size(); ++j) state.u[j] -= state.step * g[j];
  state.v = project_to_ball(state.u);
  ++state.updates;
  return state;
}

SketchSetBank::SketchSetBank(std::vector<Sketch> sketches, std::size_t dim)
    : sketches_(std::move(sketches)),
      dim_(dim),
      cursor_(sketches_.size(), 0),
      next_(sketches_.size(), 0),
      sums_(sketches_.size() * dim, 0.0),
      weights_(sketches_.size() * dim, 0.0),
      prices_(sketches_.size(), 0.0) {
  if (dim == 0) throw std::invalid_argument("bank dimension must be positive");
  for (std::size_t k = 0; k < sketches_.size(); ++k)
    if (!sketches_[k].support.empty()) next_[k] = sketches_[k].support.front();
}

Vector SketchSetBank::weight(std::size_t k) const {
  auto first = weights_.begin() + static_cast<std::ptrdiff_t>(k * dim_);
  return Vector(first, first + static_cast<std::ptrdiff_t>(dim_));
}

void SketchSetBank::advance(const ContextVector& x) {
  if (x.dim() != dim_) throw std::invalid_argument("context dimension mismatch");
  ++round_;
  const Vector& xs = x.coords();
  const std::size_t d = dim_;
  for (std::size_t k = 0; k < sketches_.size(); ++k) {
    double* w = weights_.data() + k * d;
    if (next_[k] == round_) {
      const Sketch& z = sketches_[k];
      std::size_t& c = cursor_[k];
      double* sum = sums_.data() + k * d;
      // Same operation order as reconstruct(), so the weights agree bit for bit.
      const double coef = z.coefficient(c);
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        sum[j] += coef * xs[j];
        sq += sum[j] * sum[j];
      }
      const double n = std::sqrt(sq);
      for (std::size_t j = 0; j < d; ++j) w[j] = n > 1.0 ? sum[j] / n : sum[j];
      ++c;
      next_[k] = c < z.support.size() ? z.support[c] : 0;
    }
    double p = 0.0;
    for (std::size_t j = 0; j < d; ++j) p += w[j] * xs[j];
    prices_[k] = p;
  }
}

std::unique_ptr<ExpertBank> SketchSetBank::clone() const {
  return std::make_unique<SketchSetBank>(*this);
}

OnlineSketchBank::OnlineSketchBank(std::vector<Vector> references, double epsilon) {
  if (references.empty()) throw std::invalid_argument("sampled bank needs at least one reference");
  for (auto& r : references) {
    weights_.emplace_back(r.size(), 0.0);
    sketchers_.emplace_back(std::move(r), epsilon);
  }
  prices_.assign(sketchers_.size(), 0.0);
}

void OnlineSketchBank::advance(const ContextVector& x) {
  for (std::size_t k = 0; k < sketchers_.size(); ++k) {
    weights_[k] = sketchers_[k].step(x);
    prices_[k] = dot(weights_[k], x.coords());
  }
}

std::unique_ptr<ExpertBank> OnlineSketchBank::clone() const {
  return std::make_unique<OnlineSketchBank>(*this);
}

}  // namespace omr
