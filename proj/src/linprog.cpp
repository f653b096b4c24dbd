#include "fvv/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fvv {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr long kMaxPivots = 200000;

// Dense tableau in canonical form. Column layout: structural columns first,
// then slacks, then artificials; the right-hand side is kept separately.
struct Tableau {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;    // rows x cols
  std::vector<double> rhs;  // rows
  std::vector<int> basis;   // basic column per row
  std::vector<double> obj;  // reduced costs, size cols
  double obj_value = 0.0;   // current objective value (minimization)

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  void pivot(int pr, int pc) {
    const double p = at(pr, pc);
    const double inv = 1.0 / p;
    for (int c = 0; c < cols; ++c) at(pr, c) *= inv;
    rhs[pr] *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r < rows; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c < cols; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
      rhs[r] -= f * rhs[pr];
    }
    const double f = obj[pc];
    if (f != 0.0) {
      for (int c = 0; c < cols; ++c) obj[c] -= f * at(pr, c);
      obj[pc] = 0.0;
      obj_value -= f * rhs[pr];
    }
    basis[pr] = pc;
  }

  // Bland's rule: enter the lowest-index improving column, leave by the
  // minimum ratio with the lowest basic index on ties.
  enum class Step { Moved, Optimal, Unbounded };
  Step step(int usable_cols) {
    int enter = -1;
    for (int c = 0; c < usable_cols; ++c) {
      if (obj[c] < -kPivotTol) {
        enter = c;
        break;
      }
    }
    if (enter < 0) return Step::Optimal;
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      const double arc = at(r, enter);
      if (arc > kPivotTol) {
        const double ratio = rhs[r] / arc;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) return Step::Unbounded;
    pivot(leave, enter);
    return Step::Moved;
  }
};

}  // namespace

LpResult lp_solve(const LinearProgram& lp) {
  if (lp.num_vars <= 0 || static_cast<int>(lp.objective.size()) != lp.num_vars)
    throw InvalidArgument("lp_solve: malformed objective");
  for (const auto& row : lp.rows)
    if (static_cast<int>(row.coeffs.size()) != lp.num_vars)
      throw InvalidArgument("lp_solve: malformed row");
  if (!lp.lower_bounds.empty() &&
      static_cast<int>(lp.lower_bounds.size()) != lp.num_vars)
    throw InvalidArgument("lp_solve: malformed bounds");

  const int n = lp.num_vars;
  const int m = static_cast<int>(lp.rows.size());

  // Expand to nonnegative variables: bounded vars shift, free vars split.
  struct VarMap {
    int col_plus;
    int col_minus;  // -1 when bounded
    double shift;
  };
  std::vector<VarMap> vmap(n);
  int next_col = 0;
  for (int j = 0; j < n; ++j) {
    const std::optional<double> lb =
        lp.lower_bounds.empty() ? std::nullopt : lp.lower_bounds[j];
    if (lb) {
      vmap[j] = {next_col++, -1, *lb};
    } else {
      vmap[j] = {next_col, next_col + 1, 0.0};
      next_col += 2;
    }
  }
  const int structural = next_col;

  int slack_count = 0;
  for (const auto& row : lp.rows)
    if (row.rel == Relation::LessEq) ++slack_count;

  Tableau t;
  t.rows = m;
  t.cols = structural + slack_count + m;  // artificial slots, one per row max
  t.a.assign(static_cast<std::size_t>(t.rows) * t.cols, 0.0);
  t.rhs.assign(m, 0.0);
  t.basis.assign(m, -1);

  int slack_col = structural;
  std::vector<int> row_slack(m, -1);
  for (int r = 0; r < m; ++r) {
    const auto& row = lp.rows[r];
    double rhs = row.rhs;
    for (int j = 0; j < n; ++j) {
      const double c = row.coeffs[j];
      if (c == 0.0) continue;
      rhs -= c * vmap[j].shift;
      t.at(r, vmap[j].col_plus) += c;
      if (vmap[j].col_minus >= 0) t.at(r, vmap[j].col_minus) -= c;
    }
    if (row.rel == Relation::LessEq) {
      row_slack[r] = slack_col;
      t.at(r, slack_col) = 1.0;
      ++slack_col;
    }
    t.rhs[r] = rhs;
    if (rhs < 0.0) {
      for (int c = 0; c < t.cols; ++c) t.at(r, c) = -t.at(r, c);
      t.rhs[r] = -rhs;
    }
  }

  // Basis: slacks with +1 where available, artificials otherwise.
  const int art_base = structural + slack_count;
  int art_used = 0;
  std::vector<bool> is_artificial(t.cols, false);
  for (int r = 0; r < m; ++r) {
    if (row_slack[r] >= 0 && t.at(r, row_slack[r]) > 0.5) {
      t.basis[r] = row_slack[r];
    } else {
      const int col = art_base + art_used++;
      t.at(r, col) = 1.0;
      t.basis[r] = col;
      is_artificial[col] = true;
    }
  }

  long pivots = 0;
  const int usable = art_base;  // artificials never re-enter

  if (art_used > 0) {
    // Phase 1: minimize the sum of artificials.
    t.obj.assign(t.cols, 0.0);
    t.obj_value = 0.0;
    for (int c = art_base; c < art_base + art_used; ++c) t.obj[c] = 1.0;
    for (int r = 0; r < m; ++r) {
      if (!is_artificial[t.basis[r]]) continue;
      for (int c = 0; c < t.cols; ++c) t.obj[c] -= t.at(r, c);
      t.obj_value -= t.rhs[r];
    }
    while (true) {
      if (++pivots > kMaxPivots) return {LpStatus::NumericalFailure, 0.0, {}};
      const auto s = t.step(usable);
      if (s == Tableau::Step::Optimal) break;
      if (s == Tableau::Step::Unbounded) return {LpStatus::NumericalFailure, 0.0, {}};
    }
    if (-t.obj_value > 1e-7) return {LpStatus::Infeasible, 0.0, {}};
    // Drive leftover artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
      if (!is_artificial[t.basis[r]]) continue;
      for (int c = 0; c < usable; ++c) {
        if (std::abs(t.at(r, c)) > kPivotTol) {
          t.pivot(r, c);
          break;
        }
      }
      // a row that stays artificial is redundant; its rhs is ~0
    }
  }

  // Phase 2: minimize -objective.
  t.obj.assign(t.cols, 0.0);
  t.obj_value = 0.0;
  for (int j = 0; j < n; ++j) {
    t.obj[vmap[j].col_plus] += -lp.objective[j];
    if (vmap[j].col_minus >= 0) t.obj[vmap[j].col_minus] -= -lp.objective[j];
  }
  for (int r = 0; r < m; ++r) {
    const int b = t.basis[r];
    const double cb = t.obj[b];
    if (cb == 0.0) continue;
    for (int c = 0; c < t.cols; ++c) t.obj[c] -= cb * t.at(r, c);
    t.obj[b] = 0.0;
    t.obj_value -= cb * t.rhs[r];
  }
  while (true) {
    if (++pivots > kMaxPivots) return {LpStatus::NumericalFailure, 0.0, {}};
    const auto s = t.step(usable);
    if (s == Tableau::Step::Optimal) break;
    if (s == Tableau::Step::Unbounded) return {LpStatus::Unbounded, 0.0, {}};
  }

  std::vector<double> expanded(t.cols, 0.0);
  for (int r = 0; r < m; ++r) expanded[t.basis[r]] = t.rhs[r];
  LpResult res;
  res.status = LpStatus::Optimal;
  res.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double v = expanded[vmap[j].col_plus] + vmap[j].shift;
    if (vmap[j].col_minus >= 0) v -= expanded[vmap[j].col_minus];
    res.x[j] = v;
  }
  res.value = 0.0;
  for (int j = 0; j < n; ++j) res.value += lp.objective[j] * res.x[j];
  return res;
}

}  // namespace fvv
