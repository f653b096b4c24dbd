#include <doctest.h>

#include <cmath>

#include "fvv/dp_solver.hpp"
#include "fvv/heuristics.hpp"
#include "oracles.hpp"

using namespace fvv;

namespace {

// Recomputes the best pair by scanning every feasible pair, kept separate
// from the library's pruned enumeration.
AnchorPair scan_best_pair(const CostModel& m, int k, const std::vector<int>& cams,
                          Problem problem) {
  AnchorPair best{};
  double best_cost = 1e300;
  bool found = false;
  for (int l : cams) {
    for (int r : cams) {
      if (l > r || !pair_valid(m.grid(), k, {l, r})) continue;
      const double c = m.peer_cost(k, {l, r}, problem);
      if (!found || c < best_cost - 1e-12) {
        best = {l, r};
        best_cost = c;
        found = true;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("best pair picks the unique bracket when only one exists") {
  CostModel m(ViewGrid(6, 2), CostParams{});
  const int k = 5;  // view 3.5
  const std::vector<int> cams{3, 4};
  CHECK(best_pair(m, k, cams, Problem::FlsvS) == AnchorPair{3, 4});
  CHECK_THROWS_AS(best_pair(m, k, {4, 5}, Problem::FlsvS), InfeasibleError);
}

TEST_CASE("best pair: no reconfig weight keeps the tightest bracket") {
  CostParams p;
  p.reconfig_weight = 0.0;
  CostModel m(ViewGrid(6, 2), p);
  std::vector<int> all{1, 2, 3, 4, 5, 6};
  for (int k = 0; k < m.grid().points(); ++k) {
    const AnchorPair pair = best_pair(m, k, all, Problem::FlsvS);
    CHECK(pair.left == m.grid().floor_camera(k));
    CHECK(pair.right == m.grid().ceil_camera(k));
  }
}

TEST_CASE("best pair: heavy reconfig weight pushes to the widest pair") {
  CostParams p;
  p.reconfig_weight = 1e6;
  p.horizon = 6;
  p.stay_prob = 0.4;
  CostModel m(ViewGrid(5, 2), p);
  std::vector<int> all{1, 2, 3, 4, 5};
  for (int k : {1, 3, 4, 6}) {
    const AnchorPair pair = best_pair(m, k, all, Problem::FlsvS);
    CHECK(pair == AnchorPair{1, 5});
    CHECK(pair == scan_best_pair(m, k, all, Problem::FlsvS));
  }
}

TEST_CASE("best pair agrees with a full scan on random instances") {
  Rng rng(314159);
  for (int t = 0; t < 200; ++t) {
    auto inst = fvv::testing::random_instance(rng);
    CostModel m(inst.grid, inst.params);
    std::vector<int> cams;
    for (int v = 1; v <= inst.grid.cameras(); ++v)
      if (rng.next_double() < 0.7) cams.push_back(v);
    if (cams.empty()) continue;
    for (int k : inst.pop.occupied()) {
      const bool feasible = m.grid().camera_point(cams.front()) <= k &&
                            m.grid().camera_point(cams.back()) >= k;
      if (!feasible) {
        CHECK_THROWS_AS(best_pair(m, k, cams, Problem::FlsvS), InfeasibleError);
        continue;
      }
      const AnchorPair got = best_pair(m, k, cams, Problem::FlsvS);
      const AnchorPair want = scan_best_pair(m, k, cams, Problem::FlsvS);
      CHECK(m.peer_cost(k, got, Problem::FlsvS) ==
            doctest::Approx(m.peer_cost(k, want, Problem::FlsvS)).epsilon(1e-9));
    }
  }
}

TEST_CASE("cpg_h with full budget equals independent best pairs") {
  Rng rng(161);
  for (int t = 0; t < 10; ++t) {
    auto inst = fvv::testing::random_instance(rng, 6, 2, 8);
    CostModel m(inst.grid, inst.params);
    const CpgResult r = cpg_h(m, inst.pop, inst.grid.cameras(), 7);
    // with every hull camera purchased no view can move
    std::vector<int> hull;
    const int vl = inst.grid.floor_camera(inst.pop.occupied().front());
    const int vr = inst.grid.ceil_camera(inst.pop.occupied().back());
    for (int v = vl; v <= vr; ++v) hull.push_back(v);
    double expected = 0.0;
    for (const auto& [k, n] : inst.pop.counts())
      expected += inst.pop.fraction(k) *
                  m.peer_cost(k, best_pair(m, k, hull, Problem::FlsvH), Problem::FlsvH);
    CHECK(r.alloc.total == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("cpg_h: single occupied view with small weight converges to the bracket") {
  CostParams p;
  p.reconfig_weight = 1e-6;
  CostModel m(ViewGrid(6, 2), p);
  PeerPopulation pop;
  pop.add(5, 3);  // view 3.5
  const CpgResult r = cpg_h(m, pop, 2, 99);
  CHECK(r.alloc.purchased == std::vector<int>{3, 4});
}

TEST_CASE("cpg objective never increases and certificates hold") {
  Rng rng(271828);
  for (int t = 0; t < 60; ++t) {
    auto inst = fvv::testing::random_instance(rng, 6, 2, 10);
    CostModel m(inst.grid, inst.params);
    const int budget = rng.next_int(2, inst.grid.cameras());
    const CpgResult r = cpg_h(m, inst.pop, budget, rng.next_u64());
    for (std::size_t i = 1; i < r.objective_history.size(); ++i)
      CHECK(r.objective_history[i] <= r.objective_history[i - 1] + 1e-9);

    // anchor-switch certificate: every assigned pair is the peer's best
    for (const auto& [k, pair] : r.alloc.assignment) {
      const double own = m.peer_cost(k, pair, Problem::FlsvH);
      const AnchorPair alt = scan_best_pair(m, k, r.alloc.purchased, Problem::FlsvH);
      CHECK(own <= m.peer_cost(k, alt, Problem::FlsvH) + 1e-9);
    }

    // one-step replacement certificate over interior purchased views
    const int vl = r.alloc.purchased.front();
    const int vr = r.alloc.purchased.back();
    const double total = r.alloc.total;
    for (std::size_t i = 0; i < r.alloc.purchased.size(); ++i) {
      const int v = r.alloc.purchased[i];
      if (v == vl || v == vr) continue;
      for (int target : {v - 1, v + 1}) {
        if (target <= vl || target >= vr) continue;
        if (std::binary_search(r.alloc.purchased.begin(), r.alloc.purchased.end(), target))
          continue;
        std::vector<int> cand = r.alloc.purchased;
        cand[i] = target;
        std::sort(cand.begin(), cand.end());
        const Allocation moved = assign_best_pairs(m, inst.pop, cand, Problem::FlsvH);
        CHECK(moved.total >= total - 1e-9);
      }
    }
  }
}

TEST_CASE("cpg_h never beats the exhaustive optimum") {
  Rng rng(999331);
  for (int t = 0; t < 40; ++t) {
    auto inst = fvv::testing::random_instance(rng, 6, 2, 10);
    CostModel m(inst.grid, inst.params);
    const int budget = rng.next_int(2, inst.grid.cameras());
    const CpgResult r = cpg_h(m, inst.pop, budget, rng.next_u64());
    const Allocation opt = brute_force_flsv(m, inst.pop, Problem::FlsvH, budget);
    CHECK(r.alloc.total >= opt.total - 1e-9);
  }
}

TEST_CASE("cpg_s sweeps budgets and respects price extremes") {
  Rng rng(424242);
  auto inst = fvv::testing::random_instance(rng, 6, 2, 8);

  SUBCASE("expensive views collapse to the bracket") {
    CostParams p = inst.params;
    p.access_price = 1e8;
    CostModel m(inst.grid, p);
    const CpgResult r = cpg_s(m, inst.pop, 5);
    const int vl = inst.grid.floor_camera(inst.pop.occupied().front());
    const int vr = inst.grid.ceil_camera(inst.pop.occupied().back());
    const std::size_t expect = vl == vr ? 1 : 2;
    CHECK(r.alloc.purchased.size() == expect);
  }

  SUBCASE("free views keep the full-budget candidate weakly best") {
    CostParams p = inst.params;
    p.access_price = 0.0;
    CostModel m(inst.grid, p);
    const CpgResult r = cpg_s(m, inst.pop, 5);
    const CpgResult full = cpg_h(m, inst.pop, inst.grid.cameras(), mix_seed(5, inst.grid.cameras()));
    CHECK(r.alloc.total <= full.alloc.total + 1e-9);
  }
}

TEST_CASE("cpg_s never beats the exhaustive soft optimum") {
  Rng rng(13579);
  for (int t = 0; t < 40; ++t) {
    auto inst = fvv::testing::random_instance(rng, 6, 2, 10);
    CostModel m(inst.grid, inst.params);
    const CpgResult r = cpg_s(m, inst.pop, rng.next_u64());
    const Allocation opt = brute_force_flsv(m, inst.pop, Problem::FlsvS);
    CHECK(r.alloc.total >= opt.total - 1e-9);
  }
}

TEST_CASE("exhaustive search with zero reconfig weight matches the distortion-only search") {
  Rng rng(86420);
  for (int t = 0; t < 15; ++t) {
    auto inst = fvv::testing::random_instance(rng);
    CostParams p = inst.params;
    p.reconfig_weight = 0.0;
    CostModel m(inst.grid, p);
    const Allocation flsv = brute_force_flsv(m, inst.pop, Problem::FlsvS);
    const Allocation ifls = brute_force_ifls(m, inst.pop, Problem::IflsS);
    CHECK(flsv.total == doctest::Approx(ifls.total).epsilon(1e-12));
  }
}

TEST_CASE("simple baseline: tight brackets under a monotone model") {
  CostParams p;
  CostModel m(ViewGrid(5, 2), p);
  PeerPopulation pop;
  pop.add(1, 2);
  pop.add(3, 1);
  pop.add(6, 4);
  const Allocation alloc = simple_p2p(m, pop, Problem::IflsS);
  for (const auto& [k, pair] : alloc.assignment) {
    CHECK(pair.left == m.grid().floor_camera(k));
    CHECK(pair.right == m.grid().ceil_camera(k));
  }
  CHECK(alloc.purchased == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("simple baseline equals collaboration for a single occupied view") {
  CostParams p;
  p.access_price = 1.0;
  CostModel m(ViewGrid(4, 2), p);
  PeerPopulation pop;
  pop.add(3, 5);
  const Allocation base = simple_p2p(m, pop, Problem::FlsvS);
  const Allocation opt = brute_force_flsv(m, pop, Problem::FlsvS);
  CHECK(base.total == doctest::Approx(opt.total).epsilon(1e-9));
}

TEST_CASE("simple baseline total grows linearly in the price") {
  Rng rng(303);
  auto inst = fvv::testing::random_instance(rng, 6, 2, 8);
  CostParams p0 = inst.params;
  p0.access_price = 1.0;
  CostModel m0(inst.grid, p0);
  const Allocation a0 = simple_p2p(m0, inst.pop, Problem::FlsvS);
  CostParams p1 = inst.params;
  p1.access_price = 4.0;
  CostModel m1(inst.grid, p1);
  const Allocation a1 = simple_p2p(m1, inst.pop, Problem::FlsvS);
  CHECK(a1.purchased == a0.purchased);
  CHECK(a1.total - a0.total ==
        doctest::Approx(3.0 * static_cast<double>(a0.purchased.size())).epsilon(1e-9));
}

TEST_CASE("simple baseline never beats the exhaustive optimum") {
  Rng rng(515151);
  for (int t = 0; t < 20; ++t) {
    auto inst = fvv::testing::random_instance(rng, 6, 2, 8);
    CostModel m(inst.grid, inst.params);
    const Allocation base = simple_p2p(m, inst.pop, Problem::FlsvS);
    const Allocation opt = brute_force_flsv(m, inst.pop, Problem::FlsvS);
    CHECK(base.total >= opt.total - 1e-9);
  }
}
