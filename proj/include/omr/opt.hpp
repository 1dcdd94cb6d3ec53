#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "omr/core.hpp"
#include "omr/sketch.hpp"

namespace omr {

enum class OptMode { GridOverSpan, SketchSetSup };

struct OptOracleConfig {
  OptMode mode = OptMode::GridOverSpan;
  // Largest distance from a unit direction to the nearest grid direction.
  double resolution = 1e-3;
  std::size_t max_span = 3;
  // Sketch-set mode only.
  std::vector<Sketch> sketches;
  double epsilon = 0.0;
  double tol = kDefaultTolerance;
};

struct OptEstimate {
  double value = 0.0;
  // Grid mode: the true sup over the ball is at most value + error_bound.
  // Sketch mode: the sup over the ball with these values is at most value + error_bound
  // when the values are bids and the set is the full sketch set.
  double error_bound = 0.0;
  std::string mode;
  Vector argmax;
  std::size_t span_rank = 0;
  std::size_t directions = 0;
};

enum class ValueSource { Truth, Bids };

// max over w in the unit ball of sum_t rev(w, x_t, v_t), approximated per the config.
OptEstimate opt_hindsight(std::span<const ContextVector> contexts, std::span<const double> values,
                          const OptOracleConfig& config);
OptEstimate opt_hindsight(std::span<const RoundTrace> trace, ValueSource source,
                          const OptOracleConfig& config);

// Orthonormal basis of span(x_1..x_T) by modified Gram-Schmidt.
std::vector<Vector> span_basis(std::span<const ContextVector> contexts, double tol = 1e-9);

// Unit directions in R^r whose nearest-neighbour distance to any unit vector is at most
// `resolution`. r must be 1, 2 or 3.
std::vector<Vector> direction_grid(std::size_t rank, double resolution);

}  // namespace omr
