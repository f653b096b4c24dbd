#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fvv/allocation.hpp"

namespace fvv {

// Cheapest feasible pair for grid point k drawn from the purchased cameras
// (sorted). Ties break toward the smaller span, then the leftmost pair.
// Throws InfeasibleError when no purchased camera brackets k on either side.
AnchorPair best_pair(const CostModel& model, int k, const std::vector<int>& purchased,
                     Problem problem);

// Assigns every occupied view its best pair within `purchased` and returns
// the fully evaluated allocation for the given variant.
Allocation assign_best_pairs(const CostModel& model, const PeerPopulation& pop,
                             std::vector<int> purchased, Problem problem);

struct CpgResult {
  Allocation alloc;
  std::vector<double> objective_history;  // value after init and each accepted move
  int iterations = 0;                     // full passes over movable views
};

// Iterative placement under a hard budget: bracket cameras of the occupied
// hull stay fixed, the remaining views start at random interior cameras and
// shift one camera step at a time while the total strictly decreases. Every
// accepted shift re-derives all peers' best pairs.
CpgResult cpg_h(const CostModel& model, const PeerPopulation& pop, int budget,
                std::uint64_t seed);

// Soft variant: runs the budgeted placement for every budget and keeps the
// candidate with the lowest total including access cost.
CpgResult cpg_s(const CostModel& model, const PeerPopulation& pop, std::uint64_t seed);

// Non-collaborative baseline: every peer picks its own best pair over all
// cameras; the reported total always includes the access cost of the union.
Allocation simple_p2p(const CostModel& model, const PeerPopulation& pop, Problem problem);

}  // namespace fvv
