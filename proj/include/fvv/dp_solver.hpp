#pragma once

#include <cstddef>
#include <optional>

#include "fvv/allocation.hpp"

namespace fvv {

struct DpStats {
  std::size_t table_entries = 0;
};

// Exact soft-constraint solver: memoized range recursion over
// (left anchor, occupied sub-range, right anchor). The reported total is the
// recursion value plus the access price of the initial bracketing cameras,
// which equals total_cost of the reconstructed allocation.
Allocation solve_ifls_s(const CostModel& model, const PeerPopulation& pop,
                        DpStats* stats = nullptr);

// Exact hard-budget solver: same recursion with a remaining-budget
// coordinate; the budget splits across the two sub-ranges of each cut.
Allocation solve_ifls_h(const CostModel& model, const PeerPopulation& pop, int budget,
                        DpStats* stats = nullptr);

// Exhaustive optimum over all purchased camera subsets with per-peer best
// pairs, for any problem variant. Guarded by size bounds (V <= 8, <= 40 grid
// points). Cost ties break toward the lexicographically smaller purchased set.
Allocation brute_force_flsv(const CostModel& model, const PeerPopulation& pop,
                            Problem problem, std::optional<int> budget = std::nullopt);

// Distortion-only wrapper of the exhaustive search (Ifls variants).
Allocation brute_force_ifls(const CostModel& model, const PeerPopulation& pop,
                            Problem problem, std::optional<int> budget = std::nullopt);

}  // namespace fvv
