#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fvv/allocation.hpp"
#include "fvv/game.hpp"
#include "fvv/rng.hpp"

namespace fvv {

struct SimEvent {
  enum class Kind { Join, Leave, Switch };
  Kind kind = Kind::Join;
  long t = 0;
  std::uint64_t peer = 0;
  int view_k = 0;  // join/switch target grid point
};

// Line format: `t=<int> join <peer> <view>` / `t=<int> leave <peer>` /
// `t=<int> switch <peer> <view>`; views are grid values like 3.5.
std::vector<SimEvent> parse_trace(const ViewGrid& grid, const std::string& text);
std::string format_trace(const ViewGrid& grid, const std::vector<SimEvent>& events);

struct SimConfig {
  int merge_period = 10;     // events between merge/split passes
  int snapshot_period = 50;  // events between metric snapshots
  std::uint64_t seed = 1;
  bool fairshare_at_snapshots = false;
  int fairshare_player_limit = 10;
};

// Peers on a contiguous view range sharing anchors and their access cost.
// Costs are in absolute per-peer units: member peer costs summed plus the
// access of the purchased set counted once. `clean` marks a state whose
// purchased set comes from a fresh group solve of the current membership.
struct Coalition {
  std::uint64_t id = 0;
  std::map<std::uint64_t, int> members;  // peer -> grid point
  std::uint64_t leader = 0;
  std::vector<int> purchased;
  std::map<int, AnchorPair> assignment;  // occupied grid point -> pair
  double cost = 0.0;
  double access = 0.0;
  bool clean = false;
  int hull_lo = 0;
  int hull_hi = 0;

  PeerPopulation population() const;
};

struct SnapshotRow {
  long event_index = 0;
  int coalitions = 0;
  long long peers = 0;
  int views_pulled = 0;       // purchased views summed with multiplicity
  double total_absolute = 0;  // sum of coalition costs
  double total_normalized = 0;  // peer costs averaged, access with multiplicity
  long joins = 0, leaves = 0, switches = 0;
  int fair_clamped = -1;   // -1 when fair shares were not computed
  int fair_fallback = -1;
};

struct OpRecord {
  enum class Kind { Merge, Split };
  Kind kind;
  long event_index;
  double before;  // combined cost of the affected coalitions
  double after;
};

struct SimMetrics {
  std::vector<SnapshotRow> snapshots;
  std::vector<OpRecord> operations;
  long merges = 0, splits = 0;
  std::string to_csv() const;
};

// Event-driven protocol simulation. Single-owner mutable state; all
// randomness flows from the config seed, so replays are exact.
class Simulation {
 public:
  Simulation(const CostModel& model, SimConfig config);

  void peer_join(std::uint64_t peer, int view_k);
  void peer_leave(std::uint64_t peer);
  void view_switch(std::uint64_t peer, int view_k);
  void apply(const SimEvent& event);

  // Leader-driven reorganization: returns true when the state changed.
  bool try_merge(std::uint64_t c1, std::uint64_t c2);
  bool try_split(std::uint64_t c);
  void merge_split_pass();

  SimMetrics run(const std::vector<SimEvent>& events);

  const std::map<std::uint64_t, Coalition>& coalitions() const { return coalitions_; }
  int coalition_count() const { return static_cast<int>(coalitions_.size()); }
  long long peer_count() const { return static_cast<long long>(peer_home_.size()); }
  double system_total() const;
  int views_pulled() const;

  // Recomputes every cached quantity from scratch and throws on mismatch.
  void check_invariants(bool resolve_clean = false) const;

 private:
  std::vector<std::uint64_t> order_by_range() const;
  void refresh(Coalition& c);
  void resolve(Coalition& c);  // fresh group solve, marks clean
  double solved_cost(const PeerPopulation& members, std::vector<int>* purchased,
                     std::map<int, AnchorPair>* assignment, double* access) const;
  void snapshot(SimMetrics& metrics, long event_index, long joins, long leaves,
                long switches);

  const CostModel& model_;
  SimConfig config_;
  std::map<std::uint64_t, Coalition> coalitions_;
  std::map<std::uint64_t, std::uint64_t> peer_home_;  // peer -> coalition id
  std::uint64_t next_id_ = 1;
  Rng rng_;
  SimMetrics* active_metrics_ = nullptr;
  long event_index_ = 0;
};

}  // namespace fvv
