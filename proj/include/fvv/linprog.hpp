#pragma once

#include <optional>
#include <vector>

#include "fvv/errors.hpp"

namespace fvv {

enum class Relation { LessEq, Equal };

// max objective . x  subject to rows; variables are free unless a lower
// bound is given.
struct LinearProgram {
  struct Row {
    std::vector<double> coeffs;
    Relation rel = Relation::LessEq;
    double rhs = 0.0;
  };

  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Row> rows;
  std::vector<std::optional<double>> lower_bounds;  // empty => all free

  Row& add_row(Relation rel, double rhs) {
    rows.push_back(Row{std::vector<double>(num_vars, 0.0), rel, rhs});
    return rows.back();
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct LpResult {
  LpStatus status = LpStatus::NumericalFailure;
  double value = 0.0;
  std::vector<double> x;
};

// Dense two-phase simplex with Bland's rule (anti-cycling). Deterministic.
LpResult lp_solve(const LinearProgram& lp);

}  // namespace fvv
