#pragma once

#include <cstddef>
#include <span>

#include "omr/agents.hpp"
#include "omr/protocol.hpp"

namespace omr {

struct BestResponse {
  TableStrategy::Table table;
  double utility = 0.0;
  std::size_t runs = 0;
};

// Exhaustive best response of `buyer` over deterministic history-dependent strategies with
// bids on `bid_grid`, holding the rest of `profile` fixed. Information sets are explored as
// the scenarios reach them. At each one the bids are tried from closest-to-value outward and
// only a strict improvement replaces the incumbent, so truthful bidding wins ties.
// Requires at most 4 rounds for the buyer and at most 9 grid points. Throws CapExceeded when
// the number of protocol runs would exceed `run_cap`.
BestResponse buyer_best_response(const GameInstance& game, const StrategyProfile& profile,
                                 int buyer, std::span<const double> bid_grid,
                                 std::size_t run_cap = 2000000);

// Per-scenario discounted utilities of `buyer`.
std::vector<double> scenario_utilities(const GameInstance& game, const StrategyProfile& profile,
                                       int buyer);

}  // namespace omr
