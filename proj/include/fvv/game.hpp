#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fvv/allocation.hpp"
#include "fvv/heuristics.hpp"
#include "fvv/linprog.hpp"

namespace fvv {

// Cost game over players 0..n-1. Subsets are bitmasks; the characteristic
// cost is memoized on first evaluation.
class CostGame {
 public:
  CostGame(int players, std::function<double(std::uint32_t)> cost_fn);
  static CostGame from_table(int players, std::vector<double> cost_by_mask);

  int players() const { return players_; }
  std::uint32_t full_mask() const { return (1u << players_) - 1u; }
  double cost(std::uint32_t mask) const;  // L(S), S nonempty

 private:
  int players_;
  std::function<double(std::uint32_t)> cost_fn_;
  mutable std::map<std::uint32_t, double> memo_;
};

// L(S) - sum of shares assigned to S. S must be a nonempty proper subset.
double excess(const CostGame& game, std::uint32_t subset, const std::vector<double>& x);

// All proper-subset excesses sorted in non-decreasing order.
std::vector<double> sorted_excesses(const CostGame& game, const std::vector<double>& x);

// The unique allocation lexicographically maximizing the sorted excess
// vector, computed by the sequential LP scheme: maximize the minimum excess,
// pin the subsets that are tight at every optimum, repeat until the
// allocation is unique.
std::vector<double> nucleolus(const CostGame& game, int n_max = 10);

// Parse / format the game text exchange format: one line per subset,
// `S={1,3} L=4.25`, players numbered from 1. All nonempty subsets of the
// inferred player set must be present.
CostGame parse_game(const std::string& text);
std::string format_game(const CostGame& game);

// Characteristic cost of a sub-population acting alone, in absolute
// per-peer units: the soft-variant heuristic optimum with the member count
// as weight and the access paid once. Deterministic via a seed derived from
// the membership.
double coalition_cost(const CostModel& model, const PeerPopulation& sub,
                      std::uint64_t seed_base);

std::uint64_t population_fingerprint(const PeerPopulation& pop);

// Fair division of a solved coalition's cost. Peers at the same view form a
// symmetric player; the nucleolus splits the actual coalition total when the
// player count allows, otherwise shares go proportional to standalone costs.
// A peer whose fair share falls below its fixed (distortion + switch) cost
// pays zero access and the shortfall is redistributed proportionally.
struct CoalitionShares {
  std::vector<int> views;              // player -> grid point
  std::vector<long long> weights;      // peers per player
  std::vector<double> player_share;    // fair cost per player group
  std::vector<double> peer_total;      // per peer of each group
  std::vector<double> peer_access;     // access component per peer
  double coalition_total = 0.0;
  bool proportional_fallback = false;
  bool clamp_applied = false;
};

CoalitionShares allocate_coalition(const CostModel& model, const PeerPopulation& members,
                                   const std::vector<int>& purchased,
                                   const std::map<int, AnchorPair>& assignment,
                                   std::uint64_t seed_base, int n_max = 10);

}  // namespace fvv
