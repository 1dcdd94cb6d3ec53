#include "omr/opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omr {

namespace {

struct Radial {
  double value = 0.0;
  double scale = 0.0;
};

// Best s in [0, 1] for prices s * a_t. Revenue only changes where s crosses v_t / a_t.
Radial radial_sweep(std::span<const double> a, std::span<const double> v,
                    std::vector<std::pair<double, double>>& scratch) {
  scratch.clear();
  for (std::size_t t = 0; t < a.size(); ++t)
    if (a[t] > 0.0) scratch.emplace_back(v[t] / a[t], a[t]);
  Radial best;
  if (scratch.empty()) return best;
  std::sort(scratch.begin(), scratch.end());
  // suffix[k] = sum of a over entries k..end, i.e. over all thresholds >= scratch[k].first.
  double suffix = 0.0;
  for (const auto& e : scratch) suffix += e.second;
  std::size_t k = 0;
  while (k < scratch.size()) {
    double s = scratch[k].first;
    if (s >= 1.0) {
      if (suffix > best.value) best = {suffix, 1.0};
      break;
    }
    if (s > 0.0 && s * suffix > best.value) best = {s * suffix, s};
    // Skip ties; they stop selling only beyond s.
    double group = 0.0;
    std::size_t j = k;
    while (j < scratch.size() && scratch[j].first == s) group += scratch[j++].second;
    suffix -= group;
    k = j;
  }
  return best;
}

double evaluate(std::span<const double> w, std::span<const ContextVector> contexts,
                std::span<const double> values, double tol) {
  double total = 0.0;
  for (std::size_t t = 0; t < contexts.size(); ++t)
    total += revenue_at(dot(w, contexts[t].coords()), values[t], tol);
  return total;
}

OptEstimate grid_over_span(std::span<const ContextVector> contexts, std::span<const double> values,
                           const OptOracleConfig& cfg) {
  if (!(cfg.resolution > 0.0)) throw std::invalid_argument("oracle resolution must be positive");
  auto basis = span_basis(contexts);
  const std::size_t r = basis.size();
  if (r > cfg.max_span || r > 3)
    throw std::invalid_argument("context span has dimension " + std::to_string(r) +
                                ", too large for the grid oracle");
  const std::size_t T = contexts.size();
  // Coordinates of each context in the basis.
  std::vector<Vector> y(T, Vector(r));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < r; ++j) y[t][j] = dot(contexts[t].coords(), basis[j]);

  auto dirs = direction_grid(r, cfg.resolution);
  std::vector<double> a(T);
  std::vector<std::pair<double, double>> scratch;
  scratch.reserve(T);
  Radial best;
  const Vector* best_dir = nullptr;
  for (const auto& u : dirs) {
    for (std::size_t t = 0; t < T; ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < r; ++j) s += u[j] * y[t][j];
      a[t] = s;
    }
    Radial cand = radial_sweep(a, values, scratch);
    if (cand.value > best.value) {
      best = cand;
      best_dir = &u;
    }
  }

  OptEstimate est;
  est.mode = "grid-over-span";
  est.span_rank = r;
  est.directions = dirs.size();
  const std::size_t d = contexts[0].dim();
  est.argmax.assign(d, 0.0);
  if (best_dir) {
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t i = 0; i < d; ++i) est.argmax[i] += best.scale * (*best_dir)[j] * basis[j][i];
    project_to_ball_inplace(est.argmax);
  }
  est.value = evaluate(est.argmax, contexts, values, cfg.tol);
  // A direction within distance a of the optimum, shrunk by (1 - sqrt(a)), keeps every sale
  // priced above sqrt(a) and loses at most sqrt(a) + a on each round.
  double res = r == 1 ? 0.0 : cfg.resolution;
  est.error_bound = static_cast<double>(T) * (std::sqrt(res) + res);
  return est;
}

OptEstimate sketch_set_sup(std::span<const ContextVector> contexts, std::span<const double> values,
                           const OptOracleConfig& cfg) {
  if (cfg.sketches.empty()) throw std::invalid_argument("sketch-set oracle needs sketches");
  SketchSetBank bank(cfg.sketches, contexts[0].dim());
  std::vector<double> totals(bank.size(), 0.0);
  for (std::size_t t = 0; t < contexts.size(); ++t) {
    bank.advance(contexts[t]);
    for (std::size_t k = 0; k < bank.size(); ++k) totals[k] += revenue_at(bank.price(k), values[t], cfg.tol);
  }
  auto it = std::max_element(totals.begin(), totals.end());
  OptEstimate est;
  est.mode = "sketch-set-sup";
  est.value = *it;
  est.error_bound = 4.0 * cfg.epsilon * static_cast<double>(contexts.size());
  est.span_rank = span_basis(contexts).size();
  est.directions = bank.size();
  const Sketch& z = cfg.sketches[static_cast<std::size_t>(it - totals.begin())];
  est.argmax = reconstruct(z, contexts).coords();
  return est;
}

}  // namespace

std::vector<Vector> span_basis(std::span<const ContextVector> contexts, double tol) {
  std::vector<Vector> basis;
  for (const auto& x : contexts) {
    Vector r = x.coords();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis) {
        double c = dot(r, e);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * e[i];
      }
    double n = norm(r);
    if (n > tol) {
      for (double& c : r) c /= n;
      basis.push_back(std::move(r));
    }
  }
  return basis;
}

std::vector<Vector> direction_grid(std::size_t rank, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  std::vector<Vector> dirs;
  if (rank == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (rank == 2) {
    // Adjacent directions 2 pi / n apart leave every unit vector within chord 2 sin(pi / 2n).
    double half = std::asin(std::min(1.0, resolution / 2.0));
    std::size_t n = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(std::numbers::pi / (2.0 * half))));
    for (std::size_t k = 0; k < n; ++k) {
      double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      dirs.push_back({std::cos(phi), std::sin(phi)});
    }
  } else if (rank == 3) {
    // Vertex grid on each face of the cube, spacing h; radial projection onto the sphere is
    // 1-Lipschitz outside the unit ball, so coverage is h / sqrt(2).
    std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(2.0) / resolution)));
    double h = 2.0 / static_cast<double>(n);
    for (int axis = 0; axis < 3; ++axis)
      for (double sign : {1.0, -1.0})
        for (std::size_t i = 0; i <= n; ++i)
          for (std::size_t j = 0; j <= n; ++j) {
            Vector p(3);
            p[axis] = sign;
            p[(axis + 1) % 3] = -1.0 + h * static_cast<double>(i);
            p[(axis + 2) % 3] = -1.0 + h * static_cast<double>(j);
            double nn = norm(p);
            for (double& c : p) c /= nn;
            dirs.push_back(std::move(p));
          }
  } else {
    throw std::invalid_argument("direction grid supports rank 1 to 3");
  }
  return dirs;
}

OptEstimate opt_hindsight(std::span<const ContextVector> contexts, std::span<const double> values,
                          const OptOracleConfig& config) {
  if (contexts.empty()) throw std::invalid_argument("opt needs at least one round");
  if (contexts.size() != values.size()) throw std::invalid_argument("contexts and values differ in length");
  return config.mode == OptMode::GridOverSpan ? grid_over_span(contexts, values, config)
                                              : sketch_set_sup(contexts, values, config);
}

OptEstimate opt_hindsight(std::span<const RoundTrace> trace, ValueSource source,
                          const OptOracleConfig& config) {
  std::vector<ContextVector> xs;
  std::vector<double> vs;
  xs.reserve(trace.size());
  vs.reserve(trace.size());
  for (const auto& r : trace) {
    xs.push_back(r.context);
    vs.push_back(source == ValueSource::Truth ? r.value.value() : r.bid.value());
  }
  return opt_hindsight(xs, vs, config);
}

}  // namespace omr
