#include "fvv/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

#include "fvv/rng.hpp"

namespace fvv {

CostGame::CostGame(int players, std::function<double(std::uint32_t)> cost_fn)
    : players_(players), cost_fn_(std::move(cost_fn)) {
  if (players < 1 || players > 20) throw InvalidArgument("CostGame: bad player count");
}

CostGame CostGame::from_table(int players, std::vector<double> cost_by_mask) {
  if (cost_by_mask.size() != (1u << players))
    throw InvalidArgument("CostGame: table size must be 2^n");
  auto table = std::make_shared<std::vector<double>>(std::move(cost_by_mask));
  return CostGame(players, [table](std::uint32_t mask) { return (*table)[mask]; });
}

double CostGame::cost(std::uint32_t mask) const {
  if (mask == 0 || mask > full_mask()) throw InvalidArgument("CostGame::cost: bad subset");
  auto it = memo_.find(mask);
  if (it != memo_.end()) return it->second;
  const double v = cost_fn_(mask);
  if (v < 0.0) throw InvalidArgument("CostGame::cost: negative characteristic cost");
  return memo_.emplace(mask, v).first->second;
}

double excess(const CostGame& game, std::uint32_t subset, const std::vector<double>& x) {
  if (subset == 0 || subset >= game.full_mask())
    throw InvalidArgument("excess: subset must be nonempty and proper");
  double assigned = 0.0;
  for (int i = 0; i < game.players(); ++i)
    if (subset & (1u << i)) assigned += x[i];
  return game.cost(subset) - assigned;
}

std::vector<double> sorted_excesses(const CostGame& game, const std::vector<double>& x) {
  std::vector<double> out;
  for (std::uint32_t s = 1; s < game.full_mask(); ++s) out.push_back(excess(game, s, x));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

constexpr double kFixDelta = 1e-6;   // perturbation of the re-solve test
constexpr double kDropTol = 1e-9;    // objective drop that marks a tight set

struct FixedSet {
  std::uint32_t mask;
  double eps;
};

LinearProgram stage_lp(const CostGame& game, const std::vector<FixedSet>& fixed,
                       const std::vector<std::uint32_t>& open) {
  const int n = game.players();
  LinearProgram lp;
  lp.num_vars = n + 1;  // shares plus the stage bound
  lp.objective.assign(n + 1, 0.0);
  lp.objective[n] = 1.0;
  auto& eff = lp.add_row(Relation::Equal, game.cost(game.full_mask()));
  for (int i = 0; i < n; ++i) eff.coeffs[i] = 1.0;
  for (const auto& f : fixed) {
    auto& row = lp.add_row(Relation::Equal, game.cost(f.mask) - f.eps);
    for (int i = 0; i < n; ++i)
      if (f.mask & (1u << i)) row.coeffs[i] = 1.0;
  }
  for (std::uint32_t s : open) {
    auto& row = lp.add_row(Relation::LessEq, game.cost(s));
    for (int i = 0; i < n; ++i)
      if (s & (1u << i)) row.coeffs[i] = 1.0;
    row.coeffs[n] = 1.0;
  }
  return lp;
}

// Gaussian elimination over the pinned equalities; returns the unique share
// vector when the system has full rank.
std::optional<std::vector<double>> solve_if_unique(const CostGame& game,
                                                   const std::vector<FixedSet>& fixed) {
  const int n = game.players();
  std::vector<std::vector<double>> rows;
  auto push = [&](std::uint32_t mask, double rhs) {
    std::vector<double> r(n + 1, 0.0);
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) r[i] = 1.0;
    r[n] = rhs;
    rows.push_back(std::move(r));
  };
  push(game.full_mask(), game.cost(game.full_mask()));
  for (const auto& f : fixed) push(f.mask, game.cost(f.mask) - f.eps);

  int rank = 0;
  for (int col = 0; col < n && rank < static_cast<int>(rows.size()); ++col) {
    int pivot = -1;
    double best = 1e-9;
    for (int r = rank; r < static_cast<int>(rows.size()); ++r) {
      if (std::abs(rows[r][col]) > best) {
        best = std::abs(rows[r][col]);
        pivot = r;
      }
    }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    const double inv = 1.0 / rows[rank][col];
    for (double& v : rows[rank]) v *= inv;
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      if (r == rank) continue;
      const double f = rows[r][col];
      if (f == 0.0) continue;
      for (int c = col; c <= n; ++c) rows[r][c] -= f * rows[rank][c];
    }
    ++rank;
  }
  if (rank < n) return std::nullopt;
  // back out the solution from the reduced rows
  std::vector<double> x(n, 0.0);
  for (int r = 0; r < rank; ++r) {
    int lead = -1;
    for (int c = 0; c < n; ++c) {
      if (std::abs(rows[r][c]) > 1e-7) {
        lead = c;
        break;
      }
    }
    if (lead >= 0) x[lead] = rows[r][n];
  }
  return x;
}

}  // namespace

std::vector<double> nucleolus(const CostGame& game, int n_max) {
  const int n = game.players();
  if (n > n_max) throw SizeError("nucleolus: player count above limit; aggregate first");
  if (n == 1) return {game.cost(1u)};

  std::vector<FixedSet> fixed;
  std::set<std::uint32_t> fixed_masks;
  std::vector<double> last_x;

  const int max_stages = static_cast<int>(game.full_mask());
  for (int stage = 0; stage < max_stages; ++stage) {
    std::vector<std::uint32_t> open;
    for (std::uint32_t s = 1; s < game.full_mask(); ++s)
      if (!fixed_masks.count(s)) open.push_back(s);
    if (open.empty()) break;

    const LinearProgram lp = stage_lp(game, fixed, open);
    const LpResult sol = lp_solve(lp);
    if (sol.status != LpStatus::Optimal)
      throw ConstraintError("nucleolus: stage LP not optimal");
    const double eps_k = sol.value;
    last_x.assign(sol.x.begin(), sol.x.begin() + n);

    // candidates: subsets binding at the found optimum
    std::vector<std::uint32_t> binding;
    for (std::uint32_t s : open)
      if (std::abs(excess(game, s, last_x) - eps_k) < 1e-6) binding.push_back(s);

    // re-solve test: a set is pinned iff demanding a slightly larger excess
    // for it costs objective value
    std::vector<std::uint32_t> newly_fixed;
    for (std::uint32_t s : binding) {
      std::vector<FixedSet> trial_fixed = fixed;
      trial_fixed.push_back({s, eps_k + kFixDelta});
      std::vector<std::uint32_t> trial_open;
      for (std::uint32_t o : open)
        if (o != s) trial_open.push_back(o);
      const LpResult trial = lp_solve(stage_lp(game, trial_fixed, trial_open));
      if (trial.status != LpStatus::Optimal || trial.value < eps_k - kDropTol)
        newly_fixed.push_back(s);
    }
    if (newly_fixed.empty()) newly_fixed = binding;  // numerically flat stage
    for (std::uint32_t s : newly_fixed) {
      fixed.push_back({s, eps_k});
      fixed_masks.insert(s);
    }

    if (auto unique = solve_if_unique(game, fixed)) {
      last_x = *unique;
      break;
    }
    if (fixed_masks.size() == game.full_mask() - 1) break;
  }
  return last_x;
}

CostGame parse_game(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::uint32_t, double> values;
  int max_player = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::uint32_t mask = 0;
    const auto sopen = line.find("S={");
    const auto sclose = line.find('}', sopen);
    const auto lpos = line.find("L=", sclose);
    if (sopen == std::string::npos || sclose == std::string::npos || lpos == std::string::npos)
      throw ParseError("game line " + std::to_string(lineno) + ": expected S={..} L=..");
    std::string inner = line.substr(sopen + 3, sclose - sopen - 3);
    std::replace(inner.begin(), inner.end(), ',', ' ');
    std::istringstream members(inner);
    int p;
    while (members >> p) {
      if (p < 1 || p > 20) throw ParseError("game line " + std::to_string(lineno) + ": bad player id");
      mask |= 1u << (p - 1);
      max_player = std::max(max_player, p);
    }
    if (mask == 0) throw ParseError("game line " + std::to_string(lineno) + ": empty subset");
    values[mask] = std::stod(line.substr(lpos + 2));
  }
  if (max_player == 0) throw ParseError("game file: no subsets");
  const std::uint32_t full = (1u << max_player) - 1u;
  std::vector<double> table(full + 1, 0.0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    auto it = values.find(s);
    if (it == values.end())
      throw ParseError("game file: missing subset of " + std::to_string(max_player) + " players");
    table[s] = it->second;
  }
  return CostGame::from_table(max_player, std::move(table));
}

std::string format_game(const CostGame& game) {
  std::ostringstream out;
  for (std::uint32_t s = 1; s <= game.full_mask(); ++s) {
    out << "S={";
    bool first = true;
    for (int i = 0; i < game.players(); ++i) {
      if (s & (1u << i)) {
        if (!first) out << ',';
        out << (i + 1);
        first = false;
      }
    }
    out << "} L=" << game.cost(s) << "\n";
  }
  return out.str();
}

std::uint64_t population_fingerprint(const PeerPopulation& pop) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV offset basis
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  for (const auto& [k, n] : pop.counts()) {
    mix(static_cast<std::uint64_t>(k) + 0x9e37u);
    mix(static_cast<std::uint64_t>(n));
  }
  return h;
}

double coalition_cost(const CostModel& model, const PeerPopulation& sub,
                      std::uint64_t seed_base) {
  if (sub.empty()) throw InvalidArgument("coalition_cost: empty sub-population");
  // Absolute units: scale the per-view price down by the head count, solve
  // the soft variant, then scale the whole objective back up. The argmin is
  // unchanged and the access ends up counted exactly once.
  CostParams scaled = model.params();
  scaled.access_price /= static_cast<double>(sub.total());
  const CostModel local(model.grid(), scaled);
  const CpgResult r =
      cpg_s(local, sub, mix_seed(seed_base, population_fingerprint(sub)));
  return r.alloc.total * static_cast<double>(sub.total());
}

CoalitionShares allocate_coalition(const CostModel& model, const PeerPopulation& members,
                                   const std::vector<int>& purchased,
                                   const std::map<int, AnchorPair>& assignment,
                                   std::uint64_t seed_base, int n_max) {
  if (members.empty()) throw InvalidArgument("allocate_coalition: empty coalition");
  CoalitionShares out;
  for (const auto& [k, cnt] : members.counts()) {
    out.views.push_back(k);
    out.weights.push_back(cnt);
  }
  const int n = static_cast<int>(out.views.size());

  // fixed per-peer costs under the solved anchors
  std::vector<double> fixed(n, 0.0);
  double fixed_total = 0.0;
  for (int i = 0; i < n; ++i) {
    const AnchorPair pair = assignment.at(out.views[i]);
    fixed[i] = model.peer_cost(out.views[i], pair, Problem::FlsvS);
    fixed_total += fixed[i] * static_cast<double>(out.weights[i]);
  }
  const double access_total =
      model.params().access_price * static_cast<double>(purchased.size());
  out.coalition_total = fixed_total + access_total;

  // player shares: nucleolus of the sub-population game when small enough,
  // proportional to standalone costs otherwise
  std::vector<double> standalone(n, 0.0);
  for (int i = 0; i < n; ++i) {
    PeerPopulation solo;
    solo.add(out.views[i], out.weights[i]);
    standalone[i] = coalition_cost(model, solo, seed_base);
  }

  if (n <= n_max) {
    auto subset_pop = [&](std::uint32_t mask) {
      PeerPopulation p;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) p.add(out.views[i], out.weights[i]);
      return p;
    };
    const double grand_total = out.coalition_total;
    CostGame game(n, [&, grand_total](std::uint32_t mask) {
      if (mask == (1u << n) - 1u) return grand_total;  // actual running cost
      return coalition_cost(model, subset_pop(mask), seed_base);
    });
    out.player_share = nucleolus(game, n_max);
  } else {
    out.proportional_fallback = true;
    double denom = 0.0;
    for (double s : standalone) denom += s;
    out.player_share.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
      out.player_share[i] = out.coalition_total * (denom > 0 ? standalone[i] / denom : 1.0 / n);
  }

  // per-peer totals and access components, clamping negatives
  out.peer_total.assign(n, 0.0);
  out.peer_access.assign(n, 0.0);
  double surplus = 0.0;
  double positive_pool = 0.0;
  for (int i = 0; i < n; ++i) {
    out.peer_total[i] = out.player_share[i] / static_cast<double>(out.weights[i]);
    const double access = out.peer_total[i] - fixed[i];
    if (access < 0.0) {
      surplus += -access * static_cast<double>(out.weights[i]);
      out.peer_access[i] = 0.0;
      out.clamp_applied = true;
    } else {
      out.peer_access[i] = access;
      positive_pool += access * static_cast<double>(out.weights[i]);
    }
  }
  if (out.clamp_applied && positive_pool > 0.0) {
    const double scale = (positive_pool - surplus) / positive_pool;
    for (int i = 0; i < n; ++i) out.peer_access[i] *= scale;
    for (int i = 0; i < n; ++i) out.peer_total[i] = fixed[i] + out.peer_access[i];
  }
  return out;
}

}  // namespace fvv
