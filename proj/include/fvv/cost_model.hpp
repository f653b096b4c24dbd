#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "fvv/grid.hpp"
#include "fvv/params.hpp"
#include "fvv/population.hpp"

namespace fvv {

// Left/right camera anchors serving a virtual view.
struct AnchorPair {
  int left = 0;
  int right = 0;

  friend bool operator==(const AnchorPair&, const AnchorPair&) = default;
  friend auto operator<=>(const AnchorPair&, const AnchorPair&) = default;

  int span() const { return right - left; }
};

// True iff 1 <= left <= right <= V and the pair brackets grid point k.
bool pair_valid(const ViewGrid& grid, int k, AnchorPair pair);

// Row-stochastic one-step view transition matrix over all grid points:
// stay with probability omega, move to each adjacent point with (1-omega)/2.
// At the two lattice ends the outward mass folds into the self-loop, keeping
// rows stochastic (a view cannot leave the camera range).
class TransitionMatrix {
 public:
  TransitionMatrix(int dim) : dim_(dim), p_(static_cast<std::size_t>(dim) * dim, 0.0) {}
  int dim() const { return dim_; }
  double at(int row, int col) const { return p_[static_cast<std::size_t>(row) * dim_ + col]; }
  double& at(int row, int col) { return p_[static_cast<std::size_t>(row) * dim_ + col]; }
  double row_sum(int row) const;

 private:
  int dim_;
  std::vector<double> p_;
};

TransitionMatrix transition_matrix(const ViewGrid& grid, double stay_prob);

// Explicit distortion values per (grid point, anchor pair), replacing the
// closed-form model when present.
class DistortionTable {
 public:
  void set(int k, AnchorPair pair, double value);
  double at(int k, AnchorPair pair) const;
  bool contains(int k, AnchorPair pair) const;
  const std::map<std::tuple<int, int, int>, double>& entries() const { return values_; }

 private:
  std::map<std::tuple<int, int, int>, double> values_;
};

// Probability that a walk started at grid point k leaves [lo, hi] within
// `horizon` steps. Returns 1 when k starts outside the range. The walk is
// the full-lattice transition model; leaving the window counts as escape
// even at the lattice ends only when the window edge is interior.
double escape_probability(const ViewGrid& grid, double stay_prob, int horizon,
                          int lo, int hi, int k);

// Evaluates distortion and escape costs for one (grid, params) instance.
// Escape probabilities are cached per anchor pair; the cache is guarded so
// a model can be shared across threads.
class CostModel {
 public:
  CostModel(ViewGrid grid, CostParams params);
  CostModel(ViewGrid grid, CostParams params, DistortionTable table);

  const ViewGrid& grid() const { return grid_; }
  const CostParams& params() const { return params_; }
  bool tabulated() const { return table_ != nullptr; }

  // Synthesized-view distortion of grid point k under the pair. Zero exactly
  // when k sits on either anchor (closed-form model).
  double distortion(int k, AnchorPair pair) const;

  // Probability of needing new anchors within the horizon.
  double escape(int k, AnchorPair pair) const;

  // distortion + weight * escape for Flsv variants, plain distortion otherwise.
  double peer_cost(int k, AnchorPair pair, Problem problem) const;

  // Escape probabilities for every grid point in [left..right], indexed from
  // the pair's left grid point. Cached.
  const std::vector<double>& escape_profile(AnchorPair pair) const;

 private:
  ViewGrid grid_;
  CostParams params_;
  std::shared_ptr<const DistortionTable> table_;
  mutable std::map<std::pair<int, int>, std::vector<double>> escape_cache_;
  mutable std::mutex cache_mutex_;
};

// Reference implementations operating directly on (grid, params); the
// CostModel methods must agree with these.
double distortion(const ViewGrid& grid, const CostParams& params, int k, AnchorPair pair);
double reconfig_cost(const ViewGrid& grid, const CostParams& params, int k, AnchorPair pair);
double peer_cost(const ViewGrid& grid, const CostParams& params, int k, AnchorPair pair,
                 Problem problem);

}  // namespace fvv
