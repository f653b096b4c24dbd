#include <doctest.h>

#include <cmath>
#include <set>

#include "fvv/simulation.hpp"
#include "oracles.hpp"

using namespace fvv;

namespace {

CostModel sim_model(double price = 2.0, int V = 8, int K = 2) {
  CostParams p;
  p.access_price = price;
  p.stay_prob = 0.4;
  p.horizon = 4;
  p.reconfig_weight = 1.0;
  return CostModel(ViewGrid(V, K), p);
}

// Small churn generator for protocol tests; tracks its own shadow state so
// switch targets follow the one-step walk.
std::vector<SimEvent> churn_trace(const ViewGrid& grid, int events, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SimEvent> out;
  std::map<std::uint64_t, int> alive;
  std::uint64_t next_peer = 1;
  const int last = grid.points() - 1;
  for (int t = 0; t < events; ++t) {
    SimEvent e;
    e.t = t;
    const double r = rng.next_double();
    if (alive.empty() || r < 0.3) {
      e.kind = SimEvent::Kind::Join;
      e.peer = next_peer++;
      e.view_k = rng.next_int(0, last);
      alive[e.peer] = e.view_k;
    } else if (r < 0.5) {
      e.kind = SimEvent::Kind::Leave;
      auto it = alive.begin();
      std::advance(it, static_cast<long>(rng.next_below(alive.size())));
      e.peer = it->first;
      alive.erase(it);
    } else {
      e.kind = SimEvent::Kind::Switch;
      auto it = alive.begin();
      std::advance(it, static_cast<long>(rng.next_below(alive.size())));
      e.peer = it->first;
      int k = it->second;
      const double step = rng.next_double();
      if (step < 0.4) {
        // stay
      } else if (step < 0.7) {
        if (k > 0) --k;
      } else {
        if (k < last) ++k;
      }
      e.view_k = k;
      it->second = k;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("trace format round-trips") {
  ViewGrid g(4, 3);
  std::vector<SimEvent> events{
      {SimEvent::Kind::Join, 0, 7, 4},
      {SimEvent::Kind::Switch, 1, 7, 5},
      {SimEvent::Kind::Leave, 2, 7, 0},
  };
  const std::string text = format_trace(g, events);
  const auto parsed = parse_trace(g, text);
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[0].view_k == 4);
  CHECK(parsed[1].view_k == 5);
  CHECK(parsed[2].peer == 7);
  CHECK_THROWS_AS(parse_trace(g, "t=0 join 1 1.05\n"), ParseError);  // off grid
  CHECK_THROWS_AS(parse_trace(g, "t=0 dance 1\n"), ParseError);
}

TEST_CASE("joins create and extend coalitions") {
  CostModel m = sim_model();
  Simulation sim(m, SimConfig{});

  // empty system: singleton pulling its own best anchors
  sim.peer_join(1, 5);
  REQUIRE(sim.coalition_count() == 1);
  const Coalition& c = sim.coalitions().begin()->second;
  std::vector<int> all{1, 2, 3, 4, 5, 6, 7, 8};
  const AnchorPair own = best_pair(m, 5, all, Problem::FlsvS);
  const std::vector<int> expect =
      own.left == own.right ? std::vector<int>{own.left} : std::vector<int>{own.left, own.right};
  CHECK(c.purchased == expect);

  // join inside the range: count unchanged
  sim.peer_join(2, 5);
  CHECK(sim.coalition_count() == 1);

  // join at an uncovered view: new coalition
  sim.peer_join(3, 12);
  CHECK(sim.coalition_count() == 2);

  // join strictly between two coalitions, uncovered by both
  sim.peer_join(4, 9);
  CHECK(sim.coalition_count() == 3);

  CHECK_THROWS_AS(sim.peer_join(3, 1), ProtocolError);
  sim.check_invariants();
}

TEST_CASE("two singletons on one camera view always merge under a positive price") {
  CostModel m = sim_model(3.0);
  Simulation sim(m, SimConfig{});
  const int k = m.grid().camera_point(4);
  sim.peer_join(1, k);
  // a second peer at the same view lands in the same coalition by coverage,
  // so park it one view off and drive it in via a merge-eligible singleton
  sim.peer_join(2, k);
  REQUIRE(sim.coalition_count() == 1);  // same view is covered

  // true two-coalition case: singletons one grid step apart, uncovered
  Simulation sim2(m, SimConfig{});
  sim2.peer_join(1, k);
  sim2.peer_join(2, k + 1);
  REQUIRE(sim2.coalition_count() == 2);
  const auto ids = [&] {
    std::vector<std::uint64_t> v;
    for (const auto& [id, c] : sim2.coalitions()) v.push_back(id);
    return v;
  }();
  const double before = sim2.system_total();
  CHECK(sim2.try_merge(ids[0], ids[1]));
  CHECK(sim2.coalition_count() == 1);
  CHECK(sim2.system_total() <= before + 1e-9);
  sim2.check_invariants(true);
}

TEST_CASE("far-apart singletons with a free price never merge") {
  CostModel m = sim_model(0.0);
  Simulation sim(m, SimConfig{});
  sim.peer_join(1, m.grid().camera_point(2));
  sim.peer_join(2, m.grid().camera_point(7));
  REQUIRE(sim.coalition_count() == 2);
  std::vector<std::uint64_t> ids;
  for (const auto& [id, c] : sim.coalitions()) ids.push_back(id);
  CHECK_FALSE(sim.try_merge(ids[0], ids[1]));
  CHECK(sim.coalition_count() == 2);
}

TEST_CASE("merge requires adjacency") {
  CostModel m = sim_model();
  Simulation sim(m, SimConfig{});
  sim.peer_join(1, 0);
  sim.peer_join(2, 7);
  sim.peer_join(3, 14);
  REQUIRE(sim.coalition_count() == 3);
  std::vector<std::uint64_t> ids;
  for (const auto& [id, c] : sim.coalitions()) ids.push_back(id);
  // the outer two have the middle one between them
  CHECK_THROWS_AS(sim.try_merge(ids.front(), ids.back()), ProtocolError);
}

TEST_CASE("single-view coalitions never split") {
  CostModel m = sim_model(1.0);
  Simulation sim(m, SimConfig{});
  sim.peer_join(1, 6);
  sim.peer_join(2, 6);
  sim.peer_join(3, 6);
  REQUIRE(sim.coalition_count() == 1);
  const auto id = sim.coalitions().begin()->first;
  CHECK_FALSE(sim.try_split(id));
  CHECK(sim.coalition_count() == 1);
}

TEST_CASE("leave bookkeeping, leader replacement and deletion") {
  CostModel m = sim_model();
  Simulation sim(m, SimConfig{});
  sim.peer_join(1, 4);
  sim.peer_join(2, 4);
  const auto id = sim.coalitions().begin()->first;
  REQUIRE(sim.coalitions().at(id).leader == 1);
  sim.peer_leave(1);  // leader leaves a two-member coalition
  CHECK(sim.coalitions().at(id).leader == 2);
  sim.peer_leave(2);  // last member leaves
  CHECK(sim.coalition_count() == 0);
  CHECK_THROWS_AS(sim.peer_leave(2), ProtocolError);
}

TEST_CASE("view switches stay in range or trigger leave-join") {
  CostModel m = sim_model();
  Simulation sim(m, SimConfig{});
  sim.peer_join(1, 4);
  sim.peer_join(2, 6);  // uncovered: second coalition
  REQUIRE(sim.coalition_count() == 2);
  std::vector<std::uint64_t> ids;
  for (const auto& [id, c] : sim.coalitions()) ids.push_back(id);
  REQUIRE(sim.try_merge(ids[0], ids[1]));
  REQUIRE(sim.coalition_count() == 1);

  // in-range switch: membership unchanged
  sim.view_switch(1, 5);
  CHECK(sim.coalition_count() == 1);
  // out-of-range switch to an uncovered view: fresh singleton
  sim.view_switch(1, 12);
  CHECK(sim.coalition_count() == 2);
  CHECK_THROWS_AS(sim.view_switch(77, 3), ProtocolError);
  sim.check_invariants();
}

TEST_CASE("out-of-range switch fraction matches the one-step escape prediction") {
  CostModel m = sim_model(5.0, 8, 2);
  Simulation sim(m, SimConfig{});
  // base coalition spanning grid points 4..8 (views 3..5)
  std::uint64_t peer = 1;
  for (int k = 4; k <= 8; ++k) sim.peer_join(peer++, k);
  while (sim.coalition_count() > 1) {
    std::vector<std::uint64_t> ids;
    for (const auto& [id, c] : sim.coalitions()) ids.push_back(id);
    bool merged = false;
    for (std::size_t i = 0; i + 1 < ids.size() && !merged; ++i)
      merged = sim.try_merge(ids[i], ids[i + 1]);
    REQUIRE(merged);  // sharing a positive price always pays here
  }
  REQUIRE(sim.coalition_count() == 1);

  // prediction: uniform start over the range, one-step walk, escape iff the
  // step leaves [4, 8]
  double predicted = 0.0;
  for (int k = 4; k <= 8; ++k)
    predicted += escape_probability(m.grid(), m.params().stay_prob, 1, 4, 8, k) / 5.0;

  Rng rng(515);
  const int trials = 20000;
  int exits = 0;
  const int last = m.grid().points() - 1;
  for (int t = 0; t < trials; ++t) {
    const int start = 4 + static_cast<int>(rng.next_below(5));
    const std::uint64_t probe = 100000 + static_cast<std::uint64_t>(t);
    sim.peer_join(probe, start);
    REQUIRE(sim.coalition_count() == 1);
    int next = start;
    const double r = rng.next_double();
    const double half = (1.0 - m.params().stay_prob) / 2.0;
    if (r < m.params().stay_prob) {
      // stay
    } else if (r < m.params().stay_prob + half) {
      if (next > 0) --next;
    } else {
      if (next < last) ++next;
    }
    sim.view_switch(probe, next);
    if (sim.coalition_count() == 2) ++exits;
    sim.peer_leave(probe);
    REQUIRE(sim.coalition_count() == 1);
  }
  const double fraction = static_cast<double>(exits) / trials;
  const double se = std::sqrt(predicted * (1.0 - predicted) / trials);
  CHECK(std::abs(fraction - predicted) <= 3.0 * se + 1e-9);
}

TEST_CASE("churn traces keep invariants and non-increasing reorganizations") {
  CostModel m = sim_model(2.0, 6, 2);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SimConfig cfg;
    cfg.merge_period = 5;
    cfg.snapshot_period = 20;
    cfg.seed = seed;
    Simulation sim(m, cfg);
    const auto events = churn_trace(m.grid(), 120, seed * 77);
    const SimMetrics metrics = sim.run(events);
    sim.check_invariants();
    for (const auto& op : metrics.operations) CHECK(op.after <= op.before + 1e-9);
    // snapshots recompute cleanly
    for (const auto& row : metrics.snapshots) CHECK(row.views_pulled >= row.coalitions * 0);
  }
}

TEST_CASE("identical seeds replay bit-identically") {
  CostModel m = sim_model(2.5, 6, 2);
  SimConfig cfg;
  cfg.merge_period = 7;
  cfg.snapshot_period = 15;
  cfg.seed = 99;
  const auto events = churn_trace(m.grid(), 150, 4242);
  Simulation a(m, cfg), b(m, cfg);
  const SimMetrics ma = a.run(events);
  const SimMetrics mb = b.run(events);
  CHECK(ma.to_csv() == mb.to_csv());
  CHECK(ma.merges == mb.merges);
  CHECK(ma.splits == mb.splits);
}

TEST_CASE("no events after same-view joins keeps one coalition forever") {
  CostModel m = sim_model();
  SimConfig cfg;
  cfg.merge_period = 2;
  Simulation sim(m, cfg);
  std::vector<SimEvent> events;
  for (int i = 0; i < 10; ++i)
    events.push_back({SimEvent::Kind::Join, i, static_cast<std::uint64_t>(i + 1), 6});
  const SimMetrics metrics = sim.run(events);
  CHECK(sim.coalition_count() == 1);
  CHECK(metrics.splits == 0);
}

TEST_CASE("views pulled counts multiplicity across coalitions") {
  CostModel m = sim_model(0.0);
  Simulation sim(m, SimConfig{});
  sim.peer_join(1, m.grid().camera_point(2));
  sim.peer_join(2, m.grid().camera_point(7));
  int unioned = 0;
  {
    std::set<int> s;
    for (const auto& [id, c] : sim.coalitions())
      for (int v : c.purchased) s.insert(v);
    unioned = static_cast<int>(s.size());
  }
  CHECK(sim.views_pulled() >= unioned);
}

TEST_CASE("two-cluster price sweep: splits and merges agree with direct arithmetic") {
  // clusters of off-camera views around cameras 2-3 and 6-7
  for (double price : {0.02, 8.0}) {
    CostModel m = sim_model(price, 8, 2);
    SimConfig cfg;
    cfg.seed = 31;
    Simulation sim(m, cfg);
    std::uint64_t peer = 1;
    for (int rep = 0; rep < 3; ++rep) {
      sim.peer_join(peer++, 3);  // view 2.5
      sim.peer_join(peer++, 11); // view 6.5
    }
    // force everything into one coalition through a bridging member
    sim.peer_join(peer++, 7);
    std::vector<std::uint64_t> ids;
    for (const auto& [id, c] : sim.coalitions()) ids.push_back(id);
    while (sim.coalition_count() > 1) {
      ids.clear();
      for (const auto& [id, c] : sim.coalitions()) ids.push_back(id);
      bool merged = false;
      for (std::size_t i = 0; i + 1 < ids.size() && !merged; ++i)
        merged = sim.try_merge(ids[i], ids[i + 1]);
      if (!merged) break;
    }
    if (sim.coalition_count() != 1) continue;  // merging not beneficial at this price
    const auto big = sim.coalitions().begin()->first;
    const double merged_cost = sim.coalitions().at(big).cost;

    // direct arithmetic: best contiguous bipartition cost
    const Coalition& c = sim.coalitions().at(big);
    std::vector<int> views;
    for (const auto& [p, k] : c.members) views.push_back(k);
    std::sort(views.begin(), views.end());
    views.erase(std::unique(views.begin(), views.end()), views.end());
    double best_parts = 1e300;
    SimConfig probe_cfg;
    probe_cfg.seed = cfg.seed;
    Simulation probe(m, probe_cfg);  // borrowing solved_cost via a fresh sim is
                                     // not possible; recompute with the library
    for (std::size_t i = 1; i < views.size(); ++i) {
      PeerPopulation l, r;
      for (const auto& [p, k] : c.members) (k < views[i] ? l : r).add(k);
      auto part_cost = [&](const PeerPopulation& pop) {
        CostParams scaled = m.params();
        scaled.access_price /= static_cast<double>(pop.total());
        CostModel lm(m.grid(), scaled);
        return cpg_s(lm, pop, mix_seed(cfg.seed, population_fingerprint(pop)))
                   .alloc.total *
               static_cast<double>(pop.total());
      };
      best_parts = std::min(best_parts, part_cost(l) + part_cost(r));
    }

    const bool should_split = best_parts < merged_cost - 1e-9;
    const bool did_split = sim.try_split(big);
    CHECK(did_split == should_split);
    if (did_split) {
      // hysteresis: the freshly split halves must not re-merge
      std::vector<std::uint64_t> halves;
      for (const auto& [id, cc] : sim.coalitions()) halves.push_back(id);
      REQUIRE(halves.size() == 2);
      CHECK_FALSE(sim.try_merge(halves[0], halves[1]));
    }
    sim.check_invariants(true);
  }
}
