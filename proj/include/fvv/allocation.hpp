#pragma once

#include <map>
#include <vector>

#include "fvv/cost_model.hpp"
#include "fvv/population.hpp"

namespace fvv {

// Objective components. access is always the price of the purchased set;
// hard variants leave it out of the objective but still report it.
struct CostBreakdown {
  double distortion = 0.0;
  double reconfig = 0.0;  // already weighted
  double access = 0.0;

  double objective(Problem problem) const {
    return distortion + reconfig + (uses_access(problem) ? access : 0.0);
  }
};

// A purchased camera set plus the anchor pair serving each occupied view.
struct Allocation {
  std::vector<int> purchased;            // sorted camera ids
  std::map<int, AnchorPair> assignment;  // grid point -> pair
  CostBreakdown breakdown;
  double total = 0.0;

  bool purchased_contains(int camera) const;
};

// Validates the allocation against the population (coverage, membership,
// bracketing, budget in hard variants) and recomputes the breakdown from
// scratch. Throws ConstraintError on violations.
CostBreakdown evaluate_allocation(const CostModel& model, const PeerPopulation& pop,
                                  const Allocation& alloc, Problem problem);

// evaluate_allocation + writes breakdown/total back into the allocation and
// returns the objective value.
double total_cost(const CostModel& model, const PeerPopulation& pop, Allocation& alloc,
                  Problem problem);

}  // namespace fvv
