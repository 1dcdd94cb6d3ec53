#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omr/core.hpp"
#include "omr/experts.hpp"
#include "omr/rng.hpp"
#include "omr/sketch.hpp"

namespace omr {

struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  // bound - measured for upper-bound checks, measured - bound for lower-bound checks.
  double margin = 0.0;
  bool pass = false;
};

struct VerifierReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::map<std::string, double> details;
  std::vector<std::string> notes;
  bool pass = true;

  void require_at_most(const std::string& what, double measured, double bound);
  void require_at_least(const std::string& what, double measured, double bound);
};

// Exact sup over the closed unit ball of sum_t [<w, x_t>]_+ 1[<w, x_t> <= v_t], for d <= 2.
// Independent of the grid oracle: enumerates every vertex of the line arrangement, every
// line-circle crossing, and the best point of each arc of the circle.
double exact_sup_revenue(std::span<const Vector> contexts, std::span<const double> values,
                         double tol = kDefaultTolerance);

VerifierReport verify_online_sketch(std::size_t trials, std::size_t horizon, std::size_t d,
                                    double epsilon, std::uint64_t seed);

VerifierReport verify_lazy_ogd(std::size_t trials, std::size_t rounds, double beta,
                               std::uint64_t seed, double grid_spacing = 1e-2);

// E over lambda ~ U[0, 1] of u(theta, lambda, theta) - u(theta, lambda, b).
double random_pricing_gap_exact(double theta, double bid);
VerifierReport verify_random_pricing(double theta, double bid, std::size_t samples,
                                     std::uint64_t seed);

VerifierReport verify_rev_stability(std::size_t trials, std::size_t horizon, double delta,
                                    std::uint64_t seed, std::size_t d = 2);

VerifierReport verify_sketch_set_sufficiency(std::size_t trials, std::size_t horizon,
                                             double epsilon, const SketchGrid& grid,
                                             std::uint64_t seed, std::size_t d = 2,
                                             std::uint64_t cap = 2000000);

// Reward sequences chosen from the learner's past, used against expert algorithms.
enum class RewardAdversary { BiasedStochastic, AntiLeader, Alternating };

// Plays `alg` against an adaptive adversary and returns its realised regret.
double play_expert_game(ExpertAlgorithm& alg, std::size_t horizon, RewardAdversary adversary,
                        Rng& rng);

// Bound rho^-1 sqrt(rho T ln K / 2) + 4 sqrt(rho^-1 T ln(K T)).
double sparse_regret_bound(double rho, std::size_t experts, std::size_t horizon);

VerifierReport verify_sparse_regret(double rho, std::size_t experts, std::size_t horizon,
                                    std::size_t replications, std::uint64_t seed);

struct IncentiveOptions {
  std::size_t horizon = 2;
  double gamma = 0.5;        // the buyer's discount; also used as gamma_bar
  double epsilon = 0.25;
  std::optional<double> rho_override;
  std::size_t grid_cells = 4;  // bid grid spacing 1 / grid_cells
  std::vector<double> values;  // per-round true values on the bid grid; default all 3/4
};

// Exact expectations over the sum seller's coins. Horizon 1 or 2: every deterministic strategy
// tree on the bid grid. Horizon 3: every single-information-set deviation from truthful play.
// For each strategy that misreports by more than delta at round t*, compares it with its
// truthful switch at t*.
VerifierReport verify_truthfulness_incentive(const IncentiveOptions& options, std::uint64_t seed);

struct EnvelopeOptions {
  std::size_t horizon = 2048;
  std::size_t replications = 100;
  std::size_t d = 2;
  double epsilon = 0.1;
  double grid_step = 0.25;
  std::int64_t max_multiplier = 4;
  std::size_t max_support = 1;
  double oracle_resolution = 2e-3;
  std::vector<std::string> environments = {"iid", "tracker", "rotation", "fixed"};
};

// Runs the expert-based seller with an exactly enumerated toy sketch set and truthful buyers,
// and checks mean regret <= sqrt(T ln K / 2) + 4 eps T + 3 SE on every environment.
VerifierReport verify_regret_envelope(const EnvelopeOptions& options, std::uint64_t seed);

}  // namespace omr
