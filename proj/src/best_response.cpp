#include "omr/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace omr {

std::vector<double> scenario_utilities(const GameInstance& game, const StrategyProfile& profile,
                                       int buyer) {
  GameInstance quiet = game;
  quiet.config.oracle.reset();
  auto runs = play(quiet, profile);
  std::vector<double> u;
  u.reserve(runs.size());
  for (const auto& r : runs) u.push_back(r.utilities.at(buyer - 1));
  return u;
}

namespace {

class Search {
 public:
  Search(const GameInstance& game, const StrategyProfile& profile, int buyer,
         std::span<const double> grid, std::size_t cap)
      : game_(game), config_(game.config), profile_(clone_profile(profile)), buyer_(buyer), grid_(grid), cap_(cap) {
    config_.oracle.reset();
  }

  struct Node {
    double value = 0.0;
    TableStrategy::Table table;
  };

  // Best extension of `table` for the scenarios in `members`, all of which agree with `table`
  // up to the first information set it leaves unassigned.
  Node solve(const TableStrategy::Table& table, const std::vector<std::size_t>& members) {
    std::map<std::string, std::vector<std::size_t>> open;
    std::map<std::string, double> open_value;
    Node node;
    profile_[buyer_ - 1] = std::make_unique<TableStrategy>(table);
    for (std::size_t s : members) {
      if (++runs_ > cap_) throw CapExceeded("best-response search exceeded its run cap", runs_, cap_);
      const Scenario& sc = game_.scenarios[s];
      auto seller = game_.make_seller(sc);
      auto env = game_.make_environment(sc);
      try {
        auto r = run_protocol(config_, *seller, profile_, *env, sc.seeds.child("buyers"));
        node.value += sc.weight * r.utilities.at(buyer_ - 1);
      } catch (const UnassignedInformationSet& e) {
        open[e.key()].push_back(s);
        open_value[e.key()] = e.value();
      }
    }
    for (const auto& [key, group] : open) {
      const double theta = open_value[key];
      std::vector<double> order(grid_.begin(), grid_.end());
      std::stable_sort(order.begin(), order.end(), [theta](double a, double b) {
        return std::abs(a - theta) < std::abs(b - theta);
      });
      bool have = false;
      Node best;
      double best_bid = 0.0;
      for (double b : order) {
        TableStrategy::Table next = table;
        next[key] = b;
        Node child = solve(next, group);
        if (!have || child.value > best.value) {
          best = std::move(child);
          best_bid = b;
          have = true;
        }
      }
      node.value += best.value;
      node.table.insert(best.table.begin(), best.table.end());
      node.table[key] = best_bid;
    }
    return node;
  }

  std::size_t runs() const { return runs_; }

 private:
  const GameInstance& game_;
  ProtocolConfig config_;
  StrategyProfile profile_;
  int buyer_;
  std::span<const double> grid_;
  std::size_t cap_;
  std::size_t runs_ = 0;
};

}  // namespace

BestResponse buyer_best_response(const GameInstance& game, const StrategyProfile& profile,
                                 int buyer, std::span<const double> bid_grid, std::size_t run_cap) {
  if (buyer < 1 || buyer > game.config.partition.buyers()) throw std::invalid_argument("unknown buyer");
  if (game.config.partition.rounds_of(buyer).size() > 4)
    throw std::invalid_argument("best response search supports at most 4 rounds per buyer");
  if (bid_grid.empty() || bid_grid.size() > 9)
    throw std::invalid_argument("best response search needs 1 to 9 grid points");
  for (double b : bid_grid) Bid::make(b);
  if (game.scenarios.empty()) throw std::invalid_argument("game has no scenarios");

  Search search(game, profile, buyer, bid_grid, run_cap);
  std::vector<std::size_t> all(game.scenarios.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  auto node = search.solve({}, all);
  BestResponse br;
  br.table = std::move(node.table);
  br.utility = node.value;
  br.runs = search.runs();
  return br;
}

}  // namespace omr
