#include "fvv/allocation.hpp"

#include <algorithm>

namespace fvv {

bool Allocation::purchased_contains(int camera) const {
  return std::binary_search(purchased.begin(), purchased.end(), camera);
}

CostBreakdown evaluate_allocation(const CostModel& model, const PeerPopulation& pop,
                                  const Allocation& alloc, Problem problem) {
  if (pop.empty()) throw InvalidArgument("evaluate_allocation: empty population");
  if (!std::is_sorted(alloc.purchased.begin(), alloc.purchased.end()) ||
      std::adjacent_find(alloc.purchased.begin(), alloc.purchased.end()) !=
          alloc.purchased.end())
    throw ConstraintError("allocation: purchased set not sorted/unique");
  for (int v : alloc.purchased)
    if (!model.grid().valid_camera(v))
      throw ConstraintError("allocation: purchased camera out of range");
  if (hard_budget(problem) && model.params().budget &&
      static_cast<int>(alloc.purchased.size()) > *model.params().budget)
    throw ConstraintError("allocation: purchased set exceeds budget");

  CostBreakdown b;
  for (const auto& [k, n] : pop.counts()) {
    auto it = alloc.assignment.find(k);
    if (it == alloc.assignment.end())
      throw ConstraintError("allocation: occupied view without an anchor pair");
    const AnchorPair pair = it->second;
    if (!alloc.purchased_contains(pair.left) || !alloc.purchased_contains(pair.right))
      throw ConstraintError("allocation: anchor not in purchased set");
    if (!pair_valid(model.grid(), k, pair))
      throw ConstraintError("allocation: pair does not bracket its view");
    const double q = pop.fraction(k);
    b.distortion += q * model.distortion(k, pair);
    if (uses_reconfig(problem))
      b.reconfig += q * model.params().reconfig_weight * model.escape(k, pair);
  }
  b.access = model.params().access_price * static_cast<double>(alloc.purchased.size());
  return b;
}

double total_cost(const CostModel& model, const PeerPopulation& pop, Allocation& alloc,
                  Problem problem) {
  alloc.breakdown = evaluate_allocation(model, pop, alloc, problem);
  alloc.total = alloc.breakdown.objective(problem);
  return alloc.total;
}

}  // namespace fvv
