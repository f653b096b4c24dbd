#include "fvv/cost_model.hpp"

#include <algorithm>
#include <cmath>

namespace fvv {

bool pair_valid(const ViewGrid& grid, int k, AnchorPair pair) {
  if (!grid.valid_camera(pair.left) || !grid.valid_camera(pair.right)) return false;
  if (pair.left > pair.right) return false;
  return grid.camera_point(pair.left) <= k && k <= grid.camera_point(pair.right);
}

double TransitionMatrix::row_sum(int row) const {
  double s = 0.0;
  for (int c = 0; c < dim_; ++c) s += at(row, c);
  return s;
}

TransitionMatrix transition_matrix(const ViewGrid& grid, double stay_prob) {
  if (stay_prob < 0.0 || stay_prob > 1.0)
    throw InvalidArgument("transition_matrix: stay_prob outside [0,1]");
  const int n = grid.points();
  const double half = (1.0 - stay_prob) / 2.0;
  TransitionMatrix m(n);
  for (int k = 0; k < n; ++k) {
    double stay = stay_prob;
    if (k == 0) stay += half;          // outward mass folds back at the ends
    if (k == n - 1) stay += half;
    m.at(k, k) = stay;
    if (k > 0) m.at(k, k - 1) = half;
    if (k < n - 1) m.at(k, k + 1) = half;
  }
  return m;
}

void DistortionTable::set(int k, AnchorPair pair, double value) {
  values_[{k, pair.left, pair.right}] = value;
}

double DistortionTable::at(int k, AnchorPair pair) const {
  auto it = values_.find({k, pair.left, pair.right});
  if (it == values_.end())
    throw InvalidArgument("DistortionTable: no entry for requested (view, pair)");
  return it->second;
}

bool DistortionTable::contains(int k, AnchorPair pair) const {
  return values_.count({k, pair.left, pair.right}) > 0;
}

namespace {

// One application of the transition model restricted to the window [lo, hi]:
// y[i] = sum over in-window neighbors of transition mass * x. Mass leaving
// the window is dropped; mass leaving the lattice folds into the self-loop.
void apply_window_step(const ViewGrid& grid, double stay_prob, int lo, int hi,
                       const std::vector<double>& x, std::vector<double>& y) {
  const int last = grid.points() - 1;
  const double half = (1.0 - stay_prob) / 2.0;
  const int n = hi - lo + 1;
  for (int i = 0; i < n; ++i) {
    const int g = lo + i;
    double stay = stay_prob;
    if (g == 0) stay += half;
    if (g == last) stay += half;
    double v = stay * x[i];
    if (g > 0 && i > 0) v += half * x[i - 1];
    if (g < last && i < n - 1) v += half * x[i + 1];
    y[i] = v;
  }
}

}  // namespace

double escape_probability(const ViewGrid& grid, double stay_prob, int horizon,
                          int lo, int hi, int k) {
  if (lo < 0 || hi >= grid.points() || lo > hi)
    throw InvalidArgument("escape_probability: bad window");
  if (horizon < 1) throw InvalidArgument("escape_probability: horizon < 1");
  if (k < lo || k > hi) return 1.0;
  const int n = hi - lo + 1;
  std::vector<double> x(n, 1.0), y(n, 0.0);
  for (int t = 0; t < horizon; ++t) {
    apply_window_step(grid, stay_prob, lo, hi, x, y);
    x.swap(y);
  }
  double stay = x[k - lo];
  if (stay > 1.0) stay = 1.0;
  if (stay < 0.0) stay = 0.0;
  return 1.0 - stay;
}

CostModel::CostModel(ViewGrid grid, CostParams params)
    : grid_(std::move(grid)), params_(std::move(params)) {
  params_.validate(grid_);
}

CostModel::CostModel(ViewGrid grid, CostParams params, DistortionTable table)
    : grid_(std::move(grid)),
      params_(std::move(params)),
      table_(std::make_shared<DistortionTable>(std::move(table))) {
  params_.validate(grid_);
}

double CostModel::distortion(int k, AnchorPair pair) const {
  if (!pair_valid(grid_, k, pair))
    throw InvalidArgument("distortion: pair does not bracket the view");
  if (table_) return table_->at(k, pair);
  return fvv::distortion(grid_, params_, k, pair);
}

const std::vector<double>& CostModel::escape_profile(AnchorPair pair) const {
  if (!grid_.valid_camera(pair.left) || !grid_.valid_camera(pair.right) ||
      pair.left > pair.right)
    throw InvalidArgument("escape_profile: bad pair");
  const std::pair<int, int> key{pair.left, pair.right};
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = escape_cache_.find(key);
  if (it != escape_cache_.end()) return it->second;

  const int lo = grid_.camera_point(pair.left);
  const int hi = grid_.camera_point(pair.right);
  const int n = hi - lo + 1;
  std::vector<double> x(n, 1.0), y(n, 0.0);
  for (int t = 0; t < params_.horizon; ++t) {
    apply_window_step(grid_, params_.stay_prob, lo, hi, x, y);
    x.swap(y);
  }
  for (double& v : x) v = std::min(1.0, std::max(0.0, 1.0 - v));
  return escape_cache_.emplace(key, std::move(x)).first->second;
}

double CostModel::escape(int k, AnchorPair pair) const {
  if (!pair_valid(grid_, k, pair))
    throw InvalidArgument("escape: pair does not bracket the view");
  const auto& profile = escape_profile(pair);
  return profile[k - grid_.camera_point(pair.left)];
}

double CostModel::peer_cost(int k, AnchorPair pair, Problem problem) const {
  double c = distortion(k, pair);
  if (uses_reconfig(problem)) c += params_.reconfig_weight * escape(k, pair);
  return c;
}

double distortion(const ViewGrid& grid, const CostParams& params, int k, AnchorPair pair) {
  if (!pair_valid(grid, k, pair))
    throw InvalidArgument("distortion: pair does not bracket the view");
  const int kl = grid.camera_point(pair.left);
  const int kr = grid.camera_point(pair.right);
  const double gap = static_cast<double>(std::min(k - kl, kr - k)) / grid.subdivisions();
  const double span = pair.right - pair.left;
  return params.dist_scale * std::exp(params.dist_span_rate.at(k) * span) *
         std::expm1(params.dist_gap_rate.at(k) * gap);
}

double reconfig_cost(const ViewGrid& grid, const CostParams& params, int k, AnchorPair pair) {
  if (!pair_valid(grid, k, pair))
    throw InvalidArgument("reconfig_cost: pair does not bracket the view");
  // Reference path: restrict the transition matrix to the window, raise it to
  // the horizon power and read one minus the row sum.
  const int lo = grid.camera_point(pair.left);
  const int hi = grid.camera_point(pair.right);
  const int n = hi - lo + 1;
  const TransitionMatrix full = transition_matrix(grid, params.stay_prob);
  std::vector<double> sub(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) sub[static_cast<std::size_t>(r) * n + c] = full.at(lo + r, lo + c);

  std::vector<double> power = sub;
  std::vector<double> next(static_cast<std::size_t>(n) * n, 0.0);
  for (int t = 1; t < params.horizon; ++t) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int m = 0; m < n; ++m)
          acc += power[static_cast<std::size_t>(r) * n + m] * sub[static_cast<std::size_t>(m) * n + c];
        next[static_cast<std::size_t>(r) * n + c] = acc;
      }
    }
    power.swap(next);
  }
  double stay = 0.0;
  for (int c = 0; c < n; ++c) stay += power[static_cast<std::size_t>(k - lo) * n + c];
  if (stay > 1.0) stay = 1.0;
  if (stay < 0.0) stay = 0.0;
  return 1.0 - stay;
}

double peer_cost(const ViewGrid& grid, const CostParams& params, int k, AnchorPair pair,
                 Problem problem) {
  double c = distortion(grid, params, k, pair);
  if (uses_reconfig(problem)) c += params.reconfig_weight * reconfig_cost(grid, params, k, pair);
  return c;
}

}  // namespace fvv
