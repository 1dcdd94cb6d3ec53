#include "omr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>

#include "omr/agents.hpp"
#include "omr/best_response.hpp"
#include "omr/environment.hpp"
#include "omr/protocol.hpp"

namespace omr {

void VerifierReport::require_at_most(const std::string& what, double measured, double bound) {
  Check c{what, measured, bound, bound - measured, measured <= bound};
  pass = pass && c.pass;
  checks.push_back(std::move(c));
}

void VerifierReport::require_at_least(const std::string& what, double measured, double bound) {
  Check c{what, measured, bound, measured - bound, measured >= bound};
  pass = pass && c.pass;
  checks.push_back(std::move(c));
}

// ---------------------------------------------------------------------------------------------
// Exact sup of the revenue objective in one and two dimensions.

namespace {

double objective(double w0, double w1, std::span<const Vector> xs, std::span<const double> vs,
                 double tol) {
  double total = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    double p = w0 * xs[t][0] + (xs[t].size() > 1 ? w1 * xs[t][1] : 0.0);
    if (p > 0.0 && vs[t] >= p - tol) total += p;
  }
  return total;
}

struct Line {
  double a0, a1, c;  // a0 w0 + a1 w1 = c, with (a0, a1) a unit vector
};

}  // namespace

double exact_sup_revenue(std::span<const Vector> xs, std::span<const double> vs, double tol) {
  if (xs.empty() || xs.size() != vs.size()) throw std::invalid_argument("bad instance");
  const std::size_t d = xs[0].size();
  double best = 0.0;
  if (d == 1) {
    std::vector<double> cand = {-1.0, 0.0, 1.0};
    for (std::size_t t = 0; t < xs.size(); ++t) cand.push_back(std::clamp(vs[t] / xs[t][0], -1.0, 1.0));
    for (double c : cand) best = std::max(best, objective(c, 0.0, xs, vs, tol));
    return best;
  }
  if (d != 2) throw std::invalid_argument("exact sup supports d <= 2");

  std::vector<Line> lines;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    lines.push_back({xs[t][0], xs[t][1], vs[t]});
    lines.push_back({xs[t][0], xs[t][1], 0.0});
  }
  auto consider = [&](double w0, double w1) {
    double n = std::hypot(w0, w1);
    if (n > 1.0 + 1e-9) return;
    if (n > 1.0) {
      w0 /= n;
      w1 /= n;
    }
    best = std::max(best, objective(w0, w1, xs, vs, tol));
  };
  consider(0.0, 0.0);
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Line& p = lines[i];
      const Line& q = lines[j];
      double det = p.a0 * q.a1 - p.a1 * q.a0;
      if (std::abs(det) < 1e-12) continue;
      consider((p.c * q.a1 - p.a1 * q.c) / det, (p.a0 * q.c - p.c * q.a0) / det);
    }
  std::vector<double> angles;
  for (const Line& l : lines) {
    if (std::abs(l.c) > 1.0) continue;
    double s = std::sqrt(std::max(0.0, 1.0 - l.c * l.c));
    for (double sign : {1.0, -1.0}) {
      double w0 = l.c * l.a0 - sign * s * l.a1;
      double w1 = l.c * l.a1 + sign * s * l.a0;
      consider(w0, w1);
      angles.push_back(std::atan2(w1, w0));
    }
  }
  // On each arc between crossings the selling set is fixed, so the objective is <g, w> and its
  // best point on the arc is g / |g| when that lies inside the arc.
  std::sort(angles.begin(), angles.end());
  if (angles.empty()) angles.push_back(-std::numbers::pi);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    double lo = angles[k];
    double hi = k + 1 < angles.size() ? angles[k + 1] : angles[0] + two_pi;
    if (hi - lo < 1e-15) continue;
    double mid = 0.5 * (lo + hi);
    double m0 = std::cos(mid), m1 = std::sin(mid);
    double g0 = 0.0, g1 = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      double p = m0 * xs[t][0] + m1 * xs[t][1];
      if (p > 0.0 && vs[t] >= p) {
        g0 += xs[t][0];
        g1 += xs[t][1];
      }
    }
    double gn = std::hypot(g0, g1);
    if (gn == 0.0) continue;
    double phi = std::atan2(g1, g0);
    while (phi < lo) phi += two_pi;
    if (phi <= hi) consider(g0 / gn, g1 / gn);
  }
  return best;
}

// ---------------------------------------------------------------------------------------------

VerifierReport verify_online_sketch(std::size_t trials, std::size_t horizon, std::size_t d,
                                    double epsilon, std::uint64_t seed) {
  VerifierReport rep;
  rep.name = "online-sketch";
  rep.seed = seed;
  const double eps2 = epsilon * epsilon;
  const SketchGrid grid = SketchGrid::for_epsilon(epsilon);
  SeedTree root(seed);
  double worst_error = 0.0, worst_updates = 0.0, worst_mismatch = 0.0;
  std::size_t failed = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng = root.child("trial", k).rng();
    Vector w = random_in_ball(rng, d);
    if (k % 10 == 0) w.assign(d, 0.0);
    if (k % 10 == 1) w = random_unit_vector(rng, d);
    OnlineSketcher sketcher(w, epsilon);
    std::vector<Vector> xs;
    std::vector<Vector> online;
    Vector v(d, 0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      // Half the contexts chase the current error direction, half are fresh.
      Vector x;
      Vector diff(d);
      for (std::size_t i = 0; i < d; ++i) diff[i] = v[i] - w[i];
      if (t % 2 == 1 && norm(diff) > 1e-9) {
        x = diff;
        for (double& c : x) c /= norm(diff);
      } else if (t % 7 == 3 && !xs.empty()) {
        x = xs[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(xs.size()))];
      } else {
        x = random_unit_vector(rng, d);
      }
      auto cx = ContextVector::normalized(x);
      v = sketcher.step(cx);
      online.push_back(v);
      xs.push_back(cx.coords());
    }
    Sketch z = sketcher.sketch();
    validate(z, grid);
    // Rebuild v_t from the sketch alone.
    Vector acc(d, 0.0);
    std::size_t next = 0;
    double trial_error = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t) {
      const Vector& x = xs[t - 1];
      if (next < z.support.size() && z.support[next] == t) {
        double beta = static_cast<double>(z.multipliers[next]) * z.step;
        for (std::size_t i = 0; i < d; ++i) acc[i] += beta * x[i];
        ++next;
      }
      double n = std::sqrt(dot(acc, acc));
      double scale = n > 1.0 ? 1.0 / n : 1.0;
      double pv = 0.0, pw = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        pv += acc[i] * scale * x[i];
        pw += w[i] * x[i];
        worst_mismatch = std::max(worst_mismatch, std::abs(acc[i] * scale - online[t - 1][i]));
      }
      trial_error = std::max(trial_error, std::abs(pv - pw));
    }
    double m = static_cast<double>(update_count(z));
    if (trial_error > eps2 / 2.0 + 1e-12 || m > 16.0 / eps2 + 1e-9) ++failed;
    worst_error = std::max(worst_error, trial_error);
    worst_updates = std::max(worst_updates, m);
  }
  rep.require_at_most("max round error (construction bound eps^2/2)", worst_error, eps2 / 2.0 + 1e-12);
  rep.require_at_most("max round error (stated bound eps^2)", worst_error, eps2);
  rep.require_at_most("max update count", worst_updates, 16.0 / eps2 + 1e-9);
  rep.require_at_most("failed trials", static_cast<double>(failed), 0.0);
  rep.require_at_most("online vs rebuilt weight mismatch", worst_mismatch, 1e-12);
  rep.details = {{"trials", double(trials)}, {"horizon", double(horizon)}, {"d", double(d)},
                 {"epsilon", epsilon}};
  return rep;
}

// ---------------------------------------------------------------------------------------------

VerifierReport verify_lazy_ogd(std::size_t trials, std::size_t rounds, double beta,
                               std::uint64_t seed, double spacing) {
  VerifierReport rep;
  rep.name = "lazy-ogd";
  rep.seed = seed;
  const double bound = 1.0 / (2.0 * beta) + 2.0 * beta * static_cast<double>(rounds);
  // Comparators: a square grid clipped to the disk.
  std::vector<std::pair<double, double>> grid;
  const int n = static_cast<int>(std::floor(1.0 / spacing + 1e-9));
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      double a = i * spacing, b = j * spacing;
      if (a * a + b * b <= 1.0 + 1e-12) grid.emplace_back(a, b);
    }
  SeedTree root(seed);
  double worst = -1e300;
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng = root.child("trial", k).rng();
    LazyOgdState st = LazyOgdState::init(2, beta);
    std::vector<Vector> xs;
    std::vector<double> cs;
    double learner = 0.0;
    Vector hidden = random_in_ball(rng, 2);
    for (std::size_t t = 0; t < rounds; ++t) {
      Vector x;
      double c;
      const Vector& v = st.v;
      switch (k % 3) {
        case 0: {
          // Push against the current iterate along a fixed axis.
          x = {1.0, 0.0};
          c = v[0] >= 0.0 ? -1.0 : 1.0;
          break;
        }
        case 1: {
          x = random_unit_vector(rng, 2);
          double pv = dot(v, x);
          c = pv + (pv >= 0.0 ? -0.5 : 0.5);
          break;
        }
        default: {
          x = random_unit_vector(rng, 2);
          c = dot(hidden, x) + (t % 2 == 0 ? 0.3 : -0.3);
          break;
        }
      }
      double h = dot(v, x) - c;
      learner += std::abs(h);
      Vector g = x;
      double sgn = h >= 0.0 ? 1.0 : -1.0;
      for (double& e : g) e *= sgn;
      st = lazy_ogd_step(std::move(st), g);
      xs.push_back(x);
      cs.push_back(c);
    }
    double best_comparator = 1e300;
    for (const auto& [a, b] : grid) {
      double loss = 0.0;
      for (std::size_t t = 0; t < xs.size(); ++t) loss += std::abs(a * xs[t][0] + b * xs[t][1] - cs[t]);
      best_comparator = std::min(best_comparator, loss);
    }
    worst = std::max(worst, learner - best_comparator);
  }
  rep.require_at_most("max regret over comparator grid", worst, bound);
  rep.details = {{"beta", beta}, {"rounds", double(rounds)}, {"trials", double(trials)},
                 {"grid_points", double(grid.size())}, {"grid_spacing", spacing}};
  rep.notes.push_back("comparators lie inside the ball, so the bound applies to each without a grid margin");
  return rep;
}

// ---------------------------------------------------------------------------------------------

double random_pricing_gap_exact(double theta, double bid) {
  // The integrand (theta - l)(1[l <= theta] - 1[l <= bid]) is linear between breakpoints.
  std::vector<double> pts = {0.0, 1.0, std::clamp(theta, 0.0, 1.0), std::clamp(bid, 0.0, 1.0)};
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double a = pts[k], c = pts[k + 1];
    if (c <= a) continue;
    double mid = 0.5 * (a + c);
    double ind = (mid <= theta ? 1.0 : 0.0) - (mid <= bid ? 1.0 : 0.0);
    total += ind * (c - a) * ((theta - a) + (theta - c)) / 2.0;
  }
  return total;
}

VerifierReport verify_random_pricing(double theta, double bid, std::size_t samples,
                                     std::uint64_t seed) {
  VerifierReport rep;
  rep.name = "random-pricing";
  rep.seed = seed;
  Rng rng = SeedTree(seed).rng();
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    double lambda = uniform01(rng);
    double g = utility_at(theta, lambda, theta) - utility_at(theta, lambda, bid);
    sum += g;
    sumsq += g * g;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  const double se = std::sqrt(var / n);
  const double closed = 0.5 * (theta - bid) * (theta - bid);
  const double exact = random_pricing_gap_exact(theta, bid);
  rep.require_at_most("|monte carlo - closed form| in standard errors",
                      se > 0.0 ? std::abs(mean - closed) / se : std::abs(mean - closed) * 1e12, 4.0);
  rep.require_at_most("|exact integral - closed form|", std::abs(exact - closed), 1e-15);
  rep.details = {{"theta", theta}, {"bid", bid}, {"monte_carlo", mean}, {"standard_error", se},
                 {"closed_form", closed}, {"exact_integral", exact}, {"samples", n}};
  return rep;
}

// ---------------------------------------------------------------------------------------------

VerifierReport verify_rev_stability(std::size_t trials, std::size_t horizon, double delta,
                                    std::uint64_t seed, std::size_t d) {
  VerifierReport rep;
  rep.name = "revenue-stability";
  rep.seed = seed;
  if (delta < 0.0 || delta > 0.25) throw std::invalid_argument("delta must lie in [0, 1/4]");
  const double slack = 2.0 * std::sqrt(delta) * static_cast<double>(horizon);
  SeedTree root(seed);
  double worst = -1e300;
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng = root.child("trial", k).rng();
    const std::size_t dim = k % 4 == 3 ? 1 : d;
    std::vector<Vector> xs(horizon);
    std::vector<double> theta(horizon), bid(horizon);
    const double p_star = 0.2 + 0.5 * uniform01(rng);
    for (std::size_t t = 0; t < horizon; ++t) {
      switch (k % 4) {
        case 0:  // random perturbation of either sign
          xs[t] = random_unit_vector(rng, dim);
          theta[t] = uniform01(rng);
          bid[t] = std::clamp(theta[t] + delta * (2.0 * uniform01(rng) - 1.0), 0.0, 1.0);
          break;
        case 1:  // uniform underbidding
          xs[t] = random_unit_vector(rng, dim);
          theta[t] = uniform01(rng);
          bid[t] = std::max(0.0, theta[t] - delta);
          break;
        case 2:  // values clustered on a linear model, bids just below
          xs[t] = random_unit_vector(rng, dim);
          theta[t] = std::clamp(p_star * std::abs(xs[t][0]) + delta, 0.0, 1.0);
          bid[t] = std::max(0.0, theta[t] - delta);
          break;
        default:  // one direction, every sale broken by the perturbation
          xs[t] = Vector(dim, 0.0);
          xs[t][0] = 1.0;
          theta[t] = std::min(1.0, p_star + delta);
          bid[t] = theta[t] - delta;
          break;
      }
    }
    double sup_theta = exact_sup_revenue(xs, theta);
    double sup_bid = exact_sup_revenue(xs, bid);
    worst = std::max(worst, sup_theta - sup_bid);
  }
  rep.require_at_most("max sup(theta) - sup(bid)", worst, slack);
  rep.details = {{"delta", delta}, {"horizon", double(horizon)}, {"trials", double(trials)}};
  return rep;
}

// ---------------------------------------------------------------------------------------------

namespace {

// Best total revenue over coefficient sequences, by depth-first search over rounds. Written
// independently of the sketch enumeration and reconstruction code.
double dfs_sketch_sup(std::span<const Vector> xs, std::span<const double> bids,
                      const SketchGrid& grid, double tol) {
  const std::size_t T = xs.size();
  const std::size_t d = xs[0].size();
  double best = 0.0;
  std::function<void(std::size_t, Vector, std::size_t, double)> go =
      [&](std::size_t t, Vector acc, std::size_t used, double earned) {
        if (t == T) {
          best = std::max(best, earned);
          return;
        }
        auto visit = [&](std::int64_t k) {
          Vector a = acc;
          if (k != 0)
            for (std::size_t i = 0; i < d; ++i) a[i] += static_cast<double>(k) * grid.step * xs[t][i];
          double n = std::sqrt(dot(a, a));
          double p = 0.0;
          for (std::size_t i = 0; i < d; ++i) p += (n > 1.0 ? a[i] / n : a[i]) * xs[t][i];
          double r = (p > 0.0 && bids[t] >= p - tol) ? p : 0.0;
          go(t + 1, std::move(a), used + (k != 0 ? 1 : 0), earned + r);
        };
        visit(0);
        if (used < grid.max_support)
          for (std::int64_t k = -grid.max_multiplier; k <= grid.max_multiplier; ++k)
            if (k != 0) visit(k);
      };
  go(0, Vector(d, 0.0), 0, 0.0);
  return best;
}

}  // namespace

VerifierReport verify_sketch_set_sufficiency(std::size_t trials, std::size_t horizon,
                                             double epsilon, const SketchGrid& grid,
                                             std::uint64_t seed, std::size_t d, std::uint64_t cap) {
  VerifierReport rep;
  rep.name = "sketch-set-sufficiency";
  rep.seed = seed;
  auto sketches = enumerate_sketch_set(horizon, epsilon, grid, cap);
  const double slack = 4.0 * epsilon * static_cast<double>(horizon);
  SeedTree root(seed);
  double worst = -1e300, worst_disagreement = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng = root.child("trial", k).rng();
    std::vector<Vector> xs;
    std::vector<ContextVector> cxs;
    std::vector<double> bids;
    for (std::size_t t = 0; t < horizon; ++t) {
      xs.push_back(random_unit_vector(rng, d));
      cxs.push_back(ContextVector::make(xs.back(), 1e-9));
      bids.push_back(uniform01(rng));
    }
    double sup_ball = exact_sup_revenue(xs, bids);
    SketchSetBank bank(sketches, d);
    std::vector<double> totals(bank.size(), 0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      bank.advance(cxs[t]);
      for (std::size_t z = 0; z < bank.size(); ++z) totals[z] += revenue_at(bank.price(z), bids[t]);
    }
    double sup_z = *std::max_element(totals.begin(), totals.end());
    double sup_dfs = dfs_sketch_sup(xs, bids, grid, kDefaultTolerance);
    worst_disagreement = std::max(worst_disagreement, std::abs(sup_z - sup_dfs));
    worst = std::max(worst, sup_ball - sup_z);
  }
  rep.require_at_most("max sup(ball) - sup(Z)", worst, slack);
  rep.require_at_most("enumerated vs independent search disagreement", worst_disagreement, 1e-9);
  rep.details = {{"epsilon", epsilon},        {"horizon", double(horizon)},
                 {"sketches", double(sketches.size())}, {"grid_step", grid.step},
                 {"max_multiplier", double(grid.max_multiplier)},
                 {"max_support", double(grid.max_support)}, {"trials", double(trials)}};
  if (grid.overridden) rep.notes.push_back("coarse grid override in effect");
  return rep;
}

// ---------------------------------------------------------------------------------------------

double play_expert_game(ExpertAlgorithm& alg, std::size_t horizon, RewardAdversary adversary,
                        Rng& rng) {
  const std::size_t K = alg.expert_count();
  std::vector<double> totals(K, 0.0), r(K);
  double earned = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    // Rewards depend only on the past: the learner's current distribution and fresh noise.
    switch (adversary) {
      case RewardAdversary::BiasedStochastic:
        for (std::size_t k = 0; k < K; ++k) r[k] = bernoulli(rng, k == 0 ? 0.6 : 0.5) ? 1.0 : 0.0;
        break;
      case RewardAdversary::AntiLeader: {
        auto p = alg.distribution();
        std::size_t lead = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        for (std::size_t k = 0; k < K; ++k) r[k] = k == lead ? 0.0 : uniform01(rng);
        break;
      }
      case RewardAdversary::Alternating: {
        std::size_t phase = (t / 16) % K;
        for (std::size_t k = 0; k < K; ++k) r[k] = k == phase ? 1.0 : (k == 0 ? 0.55 : 0.0);
        break;
      }
    }
    std::size_t chosen = alg.choose(uniform01(rng));
    earned += r[chosen];
    for (std::size_t k = 0; k < K; ++k) totals[k] += r[k];
    alg.update(r);
  }
  return *std::max_element(totals.begin(), totals.end()) - earned;
}

double sparse_regret_bound(double rho, std::size_t experts, std::size_t horizon) {
  const double K = static_cast<double>(experts), T = static_cast<double>(horizon);
  return std::sqrt(rho * T * std::log(K) / 2.0) / rho + 4.0 * std::sqrt(T * std::log(K * T) / rho);
}

VerifierReport verify_sparse_regret(double rho, std::size_t experts, std::size_t horizon,
                                    std::size_t replications, std::uint64_t seed) {
  VerifierReport rep;
  rep.name = "sparse-regret";
  rep.seed = seed;
  const double bound = sparse_regret_bound(rho, experts, horizon);
  const std::size_t inner_T =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(rho * static_cast<double>(horizon) - 1e-9)));
  SeedTree root(seed);
  for (auto adv : {RewardAdversary::BiasedStochastic, RewardAdversary::AntiLeader,
                   RewardAdversary::Alternating}) {
    std::vector<double> regrets;
    for (std::size_t r = 0; r < replications; ++r) {
      SeedTree rs = root.child("adversary", static_cast<std::uint64_t>(adv)).child("rep", r);
      Rng gate_rng = rs.child("gate").rng();
      Rng play_rng = rs.child("play").rng();
      SparseExpert alg(std::make_unique<Hedge>(experts, inner_T), SparseGate::draw(rho, horizon, gate_rng));
      regrets.push_back(play_expert_game(alg, horizon, adv, play_rng));
    }
    Stats s = summarize(regrets);
    const char* name = adv == RewardAdversary::BiasedStochastic ? "stochastic"
                       : adv == RewardAdversary::AntiLeader    ? "anti-leader"
                                                               : "alternating";
    rep.require_at_most(std::string("mean regret, ") + name + " adversary", s.mean, bound);
    rep.details[std::string("standard_error_") + name] = s.standard_error;
  }
  rep.details["rho"] = rho;
  rep.details["experts"] = double(experts);
  rep.details["horizon"] = double(horizon);
  rep.details["replications"] = double(replications);
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Strategic incentive at tiny horizons.

namespace {

// Truthful except at listed information sets.
class OverrideStrategy final : public BuyerStrategy {
 public:
  explicit OverrideStrategy(std::map<std::string, double> table) : table_(std::move(table)) {}
  double bid(const BuyerView& view, Rng&) override {
    auto it = table_.find(information_set_key(view));
    return it == table_.end() ? view.value : it->second;
  }
  std::string name() const override { return "override"; }
  std::unique_ptr<BuyerStrategy> clone() const override {
    return std::make_unique<OverrideStrategy>(*this);
  }

 private:
  std::map<std::string, double> table_;
};

// Records the information-set keys it is shown and bids truthfully.
class KeyRecorder final : public BuyerStrategy {
 public:
  explicit KeyRecorder(std::vector<std::set<std::string>>* keys) : keys_(keys) {}
  double bid(const BuyerView& view, Rng&) override {
    (*keys_)[view.round - 1].insert(information_set_key(view));
    return view.value;
  }
  std::string name() const override { return "recorder"; }
  std::unique_ptr<BuyerStrategy> clone() const override { return std::make_unique<KeyRecorder>(*this); }

 private:
  std::vector<std::set<std::string>>* keys_;
};

struct IncentiveGame {
  GameInstance game;
  std::vector<double> grid;
  std::vector<double> values;
  double rho = 0.0;
  double delta = 0.0;
};

IncentiveGame build_incentive_game(const IncentiveOptions& o) {
  IncentiveGame g;
  const std::size_t T = o.horizon;
  const std::size_t cells = o.grid_cells;
  for (std::size_t k = 0; k <= cells; ++k) g.grid.push_back(static_cast<double>(k) / static_cast<double>(cells));
  g.values = o.values.empty() ? std::vector<double>(T, 0.75) : o.values;
  if (g.values.size() != T) throw std::invalid_argument("need one value per round");

  SumParams params;
  params.epsilon = o.epsilon;
  params.gamma_bar = o.gamma;
  params.horizon = T;
  params.rho_override = o.rho_override;
  g.rho = params.rho();
  g.delta = compute_delta(o.epsilon, o.gamma, g.rho);

  // Experts: the empty sketch plus every single-round sketch on a quarter grid.
  auto sketches = enumerate_sketch_set(T, o.epsilon, SketchGrid::custom(0.25, 4, 1), 100000);
  std::vector<FixedRound> seq;
  for (std::size_t t = 0; t < T; ++t) seq.push_back({{1.0}, g.values[t]});

  g.game.config.partition = RoundPartition::single(T);
  g.game.config.discount = DiscountProfile::uniform(1, o.gamma);
  g.game.make_seller = [sketches, params](const Scenario& s) -> std::unique_ptr<Seller> {
    return std::make_unique<SellerSum>(std::make_unique<SketchSetBank>(sketches, 1),
                                       std::make_unique<FollowTheLeader>(sketches.size()), params,
                                       std::make_unique<ScriptedSellerCoins>(*s.coins));
  };
  g.game.make_environment = [seq](const Scenario&) { return env_fixed(seq); };
  g.game.scenarios = enumerate_sum_scenarios(T, params.random_pricing_probability(),
                                             midpoint_grid(cells), g.rho);
  g.game.exact = true;
  return g;
}

struct SwitchOutcome {
  double gain = 0.0;
  double probability = 0.0;
  double min_misreport = 1e300;
  double expected_no_influence = 0.0;  // exact gain when the learner ignores every round
};

// Compares `strategy` with its truthful switch at `t_star`. Returns nullopt when the strategy
// never misreports by more than delta at t_star.
std::optional<SwitchOutcome> compare_switch(const IncentiveGame& g, const BuyerStrategy& strategy,
                                            std::size_t t_star, double epsilon, double gamma) {
  StrategyProfile base;
  base.push_back(strategy.clone());
  StrategyProfile sw;
  sw.push_back(std::make_unique<TruthfulSwitch>(strategy.clone(), t_star, g.delta));
  auto runs = play(g.game, base);
  SwitchOutcome out;
  bool any = false;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k].rounds[t_star - 1];
    double m = std::abs(r.value.value() - r.bid.value());
    if (m > g.delta) {
      any = true;
      double w = g.game.scenarios[k].weight;
      out.probability += w;
      out.min_misreport = std::min(out.min_misreport, m);
      out.expected_no_influence += w * epsilon * 0.5 * m * m * std::pow(gamma, double(t_star - 1));
    }
  }
  if (!any) return std::nullopt;
  auto switched = play(g.game, sw);
  for (std::size_t k = 0; k < runs.size(); ++k)
    out.gain += g.game.scenarios[k].weight * (switched[k].utilities[0] - runs[k].utilities[0]);
  return out;
}

std::vector<std::string> keys_at(const IncentiveGame& g, const TableStrategy::Table& table) {
  std::set<std::string> keys;
  StrategyProfile p;
  p.push_back(std::make_unique<TableStrategy>(table));
  for (const auto& s : g.game.scenarios) {
    auto seller = g.game.make_seller(s);
    auto env = g.game.make_environment(s);
    try {
      run_protocol(g.game.config, *seller, p, *env, s.seeds);
    } catch (const UnassignedInformationSet& e) {
      keys.insert(e.key());
    }
  }
  return {keys.begin(), keys.end()};
}

}  // namespace

VerifierReport verify_truthfulness_incentive(const IncentiveOptions& o, std::uint64_t seed) {
  VerifierReport rep;
  rep.name = "truthfulness-incentive";
  rep.seed = seed;
  if (o.horizon < 1 || o.horizon > 3) throw std::invalid_argument("horizon must be 1, 2 or 3");
  IncentiveGame g = build_incentive_game(o);
  const double eps = o.epsilon, gamma = o.gamma;

  std::vector<std::unique_ptr<BuyerStrategy>> family;
  if (o.horizon <= 2) {
    // Every deterministic strategy tree.
    auto k1 = keys_at(g, {});
    for (double b1 : g.grid) {
      TableStrategy::Table t1{{k1.at(0), b1}};
      if (o.horizon == 1) {
        family.push_back(std::make_unique<TableStrategy>(t1));
        continue;
      }
      auto k2 = keys_at(g, t1);
      std::vector<std::size_t> idx(k2.size(), 0);
      for (;;) {
        TableStrategy::Table t = t1;
        for (std::size_t j = 0; j < k2.size(); ++j) t[k2[j]] = g.grid[idx[j]];
        family.push_back(std::make_unique<TableStrategy>(std::move(t)));
        std::size_t j = k2.size();
        bool done = true;
        while (j-- > 0) {
          if (++idx[j] < g.grid.size()) {
            done = false;
            break;
          }
          idx[j] = 0;
        }
        if (done) break;
      }
    }
  } else {
    // Every single deviation from truthful play at an information set truthful play reaches.
    std::vector<std::set<std::string>> keys(o.horizon);
    StrategyProfile rec;
    rec.push_back(std::make_unique<KeyRecorder>(&keys));
    play(g.game, rec);
    for (const auto& per_round : keys)
      for (const auto& key : per_round)
        for (double b : g.grid) family.push_back(std::make_unique<OverrideStrategy>(std::map<std::string, double>{{key, b}}));
  }

  std::size_t compared = 0;
  double worst_slack_m = 1e300, worst_slack_delta = 1e300, worst_gain = 1e300;
  double worst_no_influence = 0.0;
  const bool no_influence = g.rho == 0.0;
  for (const auto& s : family) {
    for (std::size_t t_star = 1; t_star <= o.horizon; ++t_star) {
      auto out = compare_switch(g, *s, t_star, eps, gamma);
      if (!out) continue;
      ++compared;
      const double cond = out->gain / out->probability;
      const double future = g.rho * std::pow(gamma, double(t_star)) / (1.0 - gamma);
      const double now = std::pow(gamma, double(t_star - 1));
      const double bound_m = eps * out->min_misreport * out->min_misreport * now / 2.0 - future;
      const double bound_delta = eps * g.delta * g.delta * now / 2.0 - future;
      worst_slack_m = std::min(worst_slack_m, cond - bound_m);
      worst_slack_delta = std::min(worst_slack_delta, cond - bound_delta);
      worst_gain = std::min(worst_gain, cond);
      if (no_influence)
        worst_no_influence = std::max(worst_no_influence, std::abs(out->gain - out->expected_no_influence));
    }
  }
  rep.require_at_least("strategies compared", static_cast<double>(compared), 1.0);
  rep.require_at_least("min conditional gain minus bound at misreport size", worst_slack_m, -1e-12);
  rep.require_at_least("min conditional gain minus bound at delta", worst_slack_delta, -1e-12);
  if (no_influence)
    rep.require_at_most("max |gain - eps m^2/2| with no learner influence", worst_no_influence, 1e-12);
  rep.details = {{"epsilon", eps},
                 {"gamma", gamma},
                 {"rho", g.rho},
                 {"delta", g.delta},
                 {"horizon", double(o.horizon)},
                 {"strategies", double(family.size())},
                 {"comparisons", double(compared)},
                 {"scenarios", double(g.game.scenarios.size())},
                 {"min_conditional_gain", worst_gain}};
  rep.notes.push_back(o.horizon <= 2 ? "family: every deterministic strategy tree on the bid grid"
                                     : "family: single deviations from truthful play");
  return rep;
}

// ---------------------------------------------------------------------------------------------

VerifierReport verify_regret_envelope(const EnvelopeOptions& o, std::uint64_t seed) {
  VerifierReport rep;
  rep.name = "regret-envelope";
  rep.seed = seed;
  const SketchGrid grid = SketchGrid::custom(o.grid_step, o.max_multiplier, o.max_support);
  auto sketches = enumerate_sketch_set(o.horizon, o.epsilon, grid, 5000000);
  const std::size_t K = sketches.size();
  const double T = static_cast<double>(o.horizon);
  const double expert_bound = Hedge::regret_bound(K, o.horizon);
  const double sketch_slack = 4.0 * o.epsilon * T;

  ProtocolConfig cfg;
  cfg.partition = RoundPartition::single(o.horizon);
  cfg.discount = DiscountProfile::uniform(1, 0.0);
  OptOracleConfig oracle;
  oracle.resolution = o.oracle_resolution;
  cfg.oracle = oracle;

  SellerFactory make_seller = [&](const SeedTree& s) -> std::unique_ptr<Seller> {
    return std::make_unique<SellerOmr>(std::make_unique<SketchSetBank>(sketches, o.d),
                                       std::make_unique<Hedge>(K, o.horizon),
                                       std::make_unique<SeededSellerCoins>(s));
  };
  SeedTree root(seed);
  for (const auto& name : o.environments) {
    EnvironmentFactory make_env;
    const std::size_t d = o.d;
    const std::size_t horizon = o.horizon;
    if (name == "iid") {
      make_env = [d](const SeedTree& s) {
        Rng setup = s.child("model").rng();
        Vector w = random_unit_vector(setup, d);
        for (double& c : w) c *= 0.7;
        return env_iid(d, contexts::uniform_sphere(d), values::linear_noisy(w, 0.2), s);
      };
    } else if (name == "tracker") {
      make_env = [d](const SeedTree& s) { return env_adaptive_tracker(d, s); };
    } else if (name == "rotation") {
      make_env = [d](const SeedTree& s) { return env_context_rotation(d, 64, s); };
    } else if (name == "fixed") {
      make_env = [d, horizon](const SeedTree& s) {
        Rng rng = s.rng();
        std::vector<FixedRound> seq;
        for (std::size_t t = 0; t < horizon; ++t) seq.push_back({random_unit_vector(rng, d), uniform01(rng)});
        return env_fixed(std::move(seq), 1e-9);
      };
    } else {
      throw std::invalid_argument("unknown environment " + name);
    }
    auto report = regret(cfg, make_seller, make_env, o.replications, root.child(name), 1, true);
    std::vector<double> approx, learn;
    for (const auto& run : report.runs) {
      double best = std::stod(run.metadata.at("best_expert_revenue"));
      approx.push_back(run.opt_truth->value - best);
      learn.push_back(best - run.revenue);
    }
    const double bound = expert_bound + sketch_slack + 3.0 * report.regret.standard_error;
    rep.require_at_most("mean regret, " + name, report.regret.mean, bound);
    rep.details["mean_regret_" + name] = report.regret.mean;
    rep.details["standard_error_" + name] = report.regret.standard_error;
    rep.details["mean_opt_" + name] = report.opt.mean;
    rep.details["mean_revenue_" + name] = report.revenue.mean;
    rep.details["mean_opt_minus_best_expert_" + name] = summarize(approx).mean;
    rep.details["mean_expert_regret_" + name] = summarize(learn).mean;
    rep.details["opt_error_bound_" + name] = report.opt_error_bound;
  }
  rep.details["experts"] = double(K);
  rep.details["expert_regret_bound"] = expert_bound;
  rep.details["sketch_slack"] = sketch_slack;
  rep.details["horizon"] = T;
  rep.details["replications"] = double(o.replications);
  rep.notes.push_back("toy sketch set under a coarse grid override; Opt from the grid oracle");
  return rep;
}

}  // namespace omr
