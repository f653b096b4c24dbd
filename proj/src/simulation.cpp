#include "fvv/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fvv/heuristics.hpp"

namespace fvv {

namespace {
constexpr double kTol = 1e-9;
}

PeerPopulation Coalition::population() const {
  PeerPopulation pop;
  for (const auto& [peer, k] : members) pop.add(k);
  return pop;
}

std::vector<SimEvent> parse_trace(const ViewGrid& grid, const std::string& text) {
  std::vector<SimEvent> events;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto grid_point = [&](double view) {
    const int k = grid.nearest_point(view);
    if (std::abs(grid.view_of(k) - view) > 1e-9)
      throw ParseError("trace line " + std::to_string(lineno) + ": view off the grid");
    return k;
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tfield, kind;
    if (!(ls >> tfield >> kind) || tfield.rfind("t=", 0) != 0)
      throw ParseError("trace line " + std::to_string(lineno) + ": expected t=<int>");
    SimEvent e;
    e.t = std::stol(tfield.substr(2));
    if (kind == "join") {
      double view;
      if (!(ls >> e.peer >> view))
        throw ParseError("trace line " + std::to_string(lineno) + ": join needs peer and view");
      e.kind = SimEvent::Kind::Join;
      e.view_k = grid_point(view);
    } else if (kind == "leave") {
      if (!(ls >> e.peer))
        throw ParseError("trace line " + std::to_string(lineno) + ": leave needs a peer");
      e.kind = SimEvent::Kind::Leave;
    } else if (kind == "switch") {
      double view;
      if (!(ls >> e.peer >> view))
        throw ParseError("trace line " + std::to_string(lineno) + ": switch needs peer and view");
      e.kind = SimEvent::Kind::Switch;
      e.view_k = grid_point(view);
    } else {
      throw ParseError("trace line " + std::to_string(lineno) + ": unknown event " + kind);
    }
    events.push_back(e);
  }
  return events;
}

std::string format_trace(const ViewGrid& grid, const std::vector<SimEvent>& events) {
  std::ostringstream out;
  out.precision(15);  // views must survive a round trip for any subdivision
  for (const auto& e : events) {
    out << "t=" << e.t << ' ';
    switch (e.kind) {
      case SimEvent::Kind::Join:
        out << "join " << e.peer << ' ' << grid.view_of(e.view_k);
        break;
      case SimEvent::Kind::Leave:
        out << "leave " << e.peer;
        break;
      case SimEvent::Kind::Switch:
        out << "switch " << e.peer << ' ' << grid.view_of(e.view_k);
        break;
    }
    out << '\n';
  }
  return out.str();
}

std::string SimMetrics::to_csv() const {
  std::ostringstream out;
  out << "event,coalitions,peers,views_pulled,total_absolute,total_normalized,"
         "joins,leaves,switches,fair_clamped,fair_fallback\n";
  for (const auto& row : snapshots) {
    out << row.event_index << ',' << row.coalitions << ',' << row.peers << ','
        << row.views_pulled << ',' << row.total_absolute << ',' << row.total_normalized
        << ',' << row.joins << ',' << row.leaves << ',' << row.switches << ','
        << row.fair_clamped << ',' << row.fair_fallback << '\n';
  }
  return out.str();
}

Simulation::Simulation(const CostModel& model, SimConfig config)
    : model_(model), config_(config), rng_(mix_seed(config.seed, 0x647067u)) {}

double Simulation::solved_cost(const PeerPopulation& members, std::vector<int>* purchased,
                               std::map<int, AnchorPair>* assignment,
                               double* access) const {
  CostParams scaled = model_.params();
  scaled.access_price /= static_cast<double>(members.total());
  const CostModel local(model_.grid(), scaled);
  const CpgResult r =
      cpg_s(local, members, mix_seed(config_.seed, population_fingerprint(members)));
  if (purchased) *purchased = r.alloc.purchased;
  if (assignment) *assignment = r.alloc.assignment;
  if (access)
    *access = model_.params().access_price * static_cast<double>(r.alloc.purchased.size());
  return r.alloc.total * static_cast<double>(members.total());
}

void Simulation::refresh(Coalition& c) {
  c.hull_lo = c.members.begin()->second;
  c.hull_hi = c.hull_lo;
  PeerPopulation pop;
  for (const auto& [peer, k] : c.members) {
    c.hull_lo = std::min(c.hull_lo, k);
    c.hull_hi = std::max(c.hull_hi, k);
    pop.add(k);
  }
  c.assignment.clear();
  double cost = 0.0;
  for (const auto& [k, n] : pop.counts()) {
    const AnchorPair pair = best_pair(model_, k, c.purchased, Problem::FlsvS);
    c.assignment[k] = pair;
    cost += static_cast<double>(n) * model_.peer_cost(k, pair, Problem::FlsvS);
  }
  c.access = model_.params().access_price * static_cast<double>(c.purchased.size());
  c.cost = cost + c.access;
}

void Simulation::resolve(Coalition& c) {
  const PeerPopulation pop = c.population();
  c.cost = solved_cost(pop, &c.purchased, &c.assignment, &c.access);
  c.hull_lo = pop.occupied().front();
  c.hull_hi = pop.occupied().back();
  c.clean = true;
}

void Simulation::peer_join(std::uint64_t peer, int view_k) {
  if (peer_home_.count(peer)) throw ProtocolError("peer_join: duplicate peer id");
  if (!model_.grid().valid_point(view_k)) throw ProtocolError("peer_join: view off grid");
  // first coalition whose range covers the view, in range order
  for (std::uint64_t id : order_by_range()) {
    Coalition& c = coalitions_.at(id);
    if (c.hull_lo <= view_k && view_k <= c.hull_hi) {
      c.members[peer] = view_k;
      peer_home_[peer] = id;
      refresh(c);
      c.clean = false;
      return;
    }
  }
  // nobody covers the view: the newcomer starts its own coalition and pulls
  // the anchors minimizing its own distortion + switch cost
  Coalition c;
  c.id = next_id_++;
  c.members[peer] = view_k;
  c.leader = peer;
  std::vector<int> all;
  for (int v = 1; v <= model_.grid().cameras(); ++v) all.push_back(v);
  const AnchorPair own = best_pair(model_, view_k, all, Problem::FlsvS);
  c.purchased = own.left == own.right ? std::vector<int>{own.left}
                                      : std::vector<int>{own.left, own.right};
  refresh(c);
  c.clean = false;
  peer_home_[peer] = c.id;
  coalitions_.emplace(c.id, std::move(c));
}

void Simulation::peer_leave(std::uint64_t peer) {
  auto it = peer_home_.find(peer);
  if (it == peer_home_.end()) throw ProtocolError("peer_leave: unknown peer");
  Coalition& c = coalitions_.at(it->second);
  c.members.erase(peer);
  peer_home_.erase(it);
  if (c.members.empty()) {
    coalitions_.erase(c.id);
    return;
  }
  if (c.leader == peer) {
    // new leader drawn at random from the remaining members
    const auto idx = rng_.next_below(c.members.size());
    auto mit = c.members.begin();
    std::advance(mit, static_cast<long>(idx));
    c.leader = mit->first;
  }
  refresh(c);
  c.clean = false;
}

void Simulation::view_switch(std::uint64_t peer, int view_k) {
  auto it = peer_home_.find(peer);
  if (it == peer_home_.end()) throw ProtocolError("view_switch: unknown peer");
  if (!model_.grid().valid_point(view_k)) throw ProtocolError("view_switch: view off grid");
  Coalition& c = coalitions_.at(it->second);
  if (c.hull_lo <= view_k && view_k <= c.hull_hi) {
    c.members[peer] = view_k;
    refresh(c);
    c.clean = false;
    return;
  }
  // out of range: leave the coalition and join (or create) another
  peer_leave(peer);
  peer_join(peer, view_k);
}

void Simulation::apply(const SimEvent& event) {
  switch (event.kind) {
    case SimEvent::Kind::Join:
      peer_join(event.peer, event.view_k);
      break;
    case SimEvent::Kind::Leave:
      peer_leave(event.peer);
      break;
    case SimEvent::Kind::Switch:
      view_switch(event.peer, event.view_k);
      break;
  }
}

std::vector<std::uint64_t> Simulation::order_by_range() const {
  std::vector<std::uint64_t> ids;
  ids.reserve(coalitions_.size());
  for (const auto& [id, c] : coalitions_) ids.push_back(id);
  std::sort(ids.begin(), ids.end(), [this](std::uint64_t a, std::uint64_t b) {
    const Coalition& ca = coalitions_.at(a);
    const Coalition& cb = coalitions_.at(b);
    if (ca.hull_lo != cb.hull_lo) return ca.hull_lo < cb.hull_lo;
    return a < b;
  });
  return ids;
}

bool Simulation::try_merge(std::uint64_t id1, std::uint64_t id2) {
  auto i1 = coalitions_.find(id1);
  auto i2 = coalitions_.find(id2);
  if (i1 == coalitions_.end() || i2 == coalitions_.end())
    throw ProtocolError("try_merge: unknown coalition");
  // adjacency: no third coalition's range sits between the two
  const Coalition* left = &i1->second;
  const Coalition* right = &i2->second;
  if (left->hull_lo > right->hull_lo) std::swap(left, right);
  for (const auto& [id, c] : coalitions_) {
    if (id == id1 || id == id2) continue;
    if (c.hull_lo > left->hull_hi && c.hull_hi < right->hull_lo)
      throw ProtocolError("try_merge: coalitions are not view-adjacent");
  }

  Coalition& c1 = i1->second;
  Coalition& c2 = i2->second;
  if (!c1.clean) resolve(c1);
  if (!c2.clean) resolve(c2);

  PeerPopulation merged_pop;
  for (const auto& [peer, k] : c1.members) merged_pop.add(k);
  for (const auto& [peer, k] : c2.members) merged_pop.add(k);

  std::vector<int> purchased;
  std::map<int, AnchorPair> assignment;
  double access = 0.0;
  const double merged_cost = solved_cost(merged_pop, &purchased, &assignment, &access);
  const double before = c1.cost + c2.cost;
  if (!(merged_cost < before - kTol)) return false;

  Coalition merged;
  merged.id = next_id_++;
  merged.members = c1.members;
  merged.members.insert(c2.members.begin(), c2.members.end());
  merged.leader = c1.leader;  // the requesting leader keeps the lead
  merged.purchased = std::move(purchased);
  merged.assignment = std::move(assignment);
  merged.cost = merged_cost;
  merged.access = access;
  merged.clean = true;
  merged.hull_lo = std::min(c1.hull_lo, c2.hull_lo);
  merged.hull_hi = std::max(c1.hull_hi, c2.hull_hi);
  for (const auto& [peer, k] : merged.members) peer_home_[peer] = merged.id;
  coalitions_.erase(id1);
  coalitions_.erase(id2);
  if (active_metrics_) {
    active_metrics_->operations.push_back(
        {OpRecord::Kind::Merge, event_index_, before, merged_cost});
    ++active_metrics_->merges;
  }
  coalitions_.emplace(merged.id, std::move(merged));
  return true;
}

bool Simulation::try_split(std::uint64_t id) {
  auto it = coalitions_.find(id);
  if (it == coalitions_.end()) throw ProtocolError("try_split: unknown coalition");
  Coalition& c = it->second;
  if (c.members.size() < 2) return false;
  if (!c.clean) resolve(c);

  std::vector<int> views;
  for (const auto& [peer, k] : c.members) views.push_back(k);
  std::sort(views.begin(), views.end());
  views.erase(std::unique(views.begin(), views.end()), views.end());
  if (views.size() < 2) return false;

  double best = c.cost;
  int best_cut = -1;
  for (std::size_t i = 1; i < views.size(); ++i) {
    const int cut = views[i];  // members with view >= cut go right
    PeerPopulation left_pop, right_pop;
    for (const auto& [peer, k] : c.members)
      (k < cut ? left_pop : right_pop).add(k);
    const double cost =
        solved_cost(left_pop, nullptr, nullptr, nullptr) +
        solved_cost(right_pop, nullptr, nullptr, nullptr);
    if (cost < best - kTol) {
      best = cost;
      best_cut = cut;
    }
  }
  if (best_cut < 0) return false;

  Coalition left, right;
  left.id = next_id_++;
  right.id = next_id_++;
  for (const auto& [peer, k] : c.members)
    (k < best_cut ? left : right).members.emplace(peer, k);
  const double before = c.cost;

  // the half keeping the old leader stays "the coalition"; the other one is
  // newly created and draws a leader at random
  Coalition* keeps_leader = c.members.at(c.leader) < best_cut ? &left : &right;
  Coalition* created = keeps_leader == &left ? &right : &left;
  keeps_leader->leader = c.leader;
  {
    const auto idx = rng_.next_below(created->members.size());
    auto mit = created->members.begin();
    std::advance(mit, static_cast<long>(idx));
    created->leader = mit->first;
  }
  coalitions_.erase(id);
  for (Coalition* part : {&left, &right}) {
    PeerPopulation pop = part->population();
    part->cost = solved_cost(pop, &part->purchased, &part->assignment, &part->access);
    part->hull_lo = pop.occupied().front();
    part->hull_hi = pop.occupied().back();
    part->clean = true;
    for (const auto& [peer, k] : part->members) peer_home_[peer] = part->id;
  }
  const double after = left.cost + right.cost;
  if (active_metrics_) {
    active_metrics_->operations.push_back({OpRecord::Kind::Split, event_index_, before, after});
    ++active_metrics_->splits;
  }
  coalitions_.emplace(left.id, std::move(left));
  coalitions_.emplace(right.id, std::move(right));
  return true;
}

void Simulation::merge_split_pass() {
  // settle every coalition first so merge comparisons use solved costs
  for (auto& [id, c] : coalitions_)
    if (!c.clean) resolve(c);
  // left-to-right merge attempts, restarting after any merge
  bool merged = true;
  while (merged) {
    merged = false;
    const auto ids = order_by_range();
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      if (try_merge(ids[i], ids[i + 1])) {
        merged = true;
        break;
      }
    }
  }
  // one split attempt per coalition after merges settle
  for (std::uint64_t id : order_by_range()) {
    if (coalitions_.count(id)) try_split(id);
  }
}

double Simulation::system_total() const {
  double t = 0.0;
  for (const auto& [id, c] : coalitions_) t += c.cost;
  return t;
}

int Simulation::views_pulled() const {
  int n = 0;
  for (const auto& [id, c] : coalitions_) n += static_cast<int>(c.purchased.size());
  return n;
}

void Simulation::snapshot(SimMetrics& metrics, long event_index, long joins, long leaves,
                          long switches) {
  SnapshotRow row;
  row.event_index = event_index;
  row.coalitions = coalition_count();
  row.peers = peer_count();
  row.views_pulled = views_pulled();
  row.total_absolute = system_total();
  double peer_part = 0.0;
  double access_part = 0.0;
  for (const auto& [id, c] : coalitions_) {
    peer_part += c.cost - c.access;
    access_part += c.access;
  }
  row.total_normalized =
      peer_count() > 0 ? peer_part / static_cast<double>(peer_count()) + access_part : 0.0;
  row.joins = joins;
  row.leaves = leaves;
  row.switches = switches;
  if (config_.fairshare_at_snapshots) {
    row.fair_clamped = 0;
    row.fair_fallback = 0;
    for (const auto& [id, c] : coalitions_) {
      const CoalitionShares shares =
          allocate_coalition(model_, c.population(), c.purchased, c.assignment,
                             config_.seed, config_.fairshare_player_limit);
      if (shares.clamp_applied) ++row.fair_clamped;
      if (shares.proportional_fallback) ++row.fair_fallback;
    }
  }
  metrics.snapshots.push_back(row);
}

SimMetrics Simulation::run(const std::vector<SimEvent>& events) {
  SimMetrics metrics;
  active_metrics_ = &metrics;
  long joins = 0, leaves = 0, switches = 0;
  event_index_ = 0;
  for (const auto& e : events) {
    apply(e);
    ++event_index_;
    switch (e.kind) {
      case SimEvent::Kind::Join: ++joins; break;
      case SimEvent::Kind::Leave: ++leaves; break;
      case SimEvent::Kind::Switch: ++switches; break;
    }
    if (config_.merge_period > 0 && event_index_ % config_.merge_period == 0)
      merge_split_pass();
    if (config_.snapshot_period > 0 && event_index_ % config_.snapshot_period == 0)
      snapshot(metrics, event_index_, joins, leaves, switches);
  }
  if (metrics.snapshots.empty() || metrics.snapshots.back().event_index != event_index_)
    snapshot(metrics, event_index_, joins, leaves, switches);
  active_metrics_ = nullptr;
  return metrics;
}

void Simulation::check_invariants(bool resolve_clean) const {
  // the coalitions partition the peer set
  std::size_t member_total = 0;
  for (const auto& [id, c] : coalitions_) {
    if (c.members.empty()) throw ProtocolError("invariant: empty coalition kept");
    if (!c.members.count(c.leader)) throw ProtocolError("invariant: leader not a member");
    member_total += c.members.size();
    int lo = c.members.begin()->second, hi = lo;
    for (const auto& [peer, k] : c.members) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
      auto home = peer_home_.find(peer);
      if (home == peer_home_.end() || home->second != id)
        throw ProtocolError("invariant: peer/coalition map mismatch");
    }
    if (lo != c.hull_lo || hi != c.hull_hi)
      throw ProtocolError("invariant: stale view range");
    // cached cost equals a recomputation under the current purchased set
    double cost = model_.params().access_price * static_cast<double>(c.purchased.size());
    for (const auto& [peer, k] : c.members) {
      auto ait = c.assignment.find(k);
      if (ait == c.assignment.end()) throw ProtocolError("invariant: missing assignment");
      if (!pair_valid(model_.grid(), k, ait->second))
        throw ProtocolError("invariant: pair does not bracket its view");
      cost += model_.peer_cost(k, ait->second, Problem::FlsvS);
    }
    if (std::abs(cost - c.cost) > 1e-9)
      throw ProtocolError("invariant: cached cost out of date");
    if (resolve_clean && c.clean) {
      const double fresh = solved_cost(c.population(), nullptr, nullptr, nullptr);
      if (std::abs(fresh - c.cost) > 1e-9)
        throw ProtocolError("invariant: clean coalition does not match a fresh solve");
    }
  }
  if (member_total != peer_home_.size())
    throw ProtocolError("invariant: membership counts disagree");
}

}  // namespace fvv
