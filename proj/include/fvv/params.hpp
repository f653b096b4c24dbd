#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fvv/errors.hpp"
#include "fvv/grid.hpp"

namespace fvv {

// The four problem variants. Hard variants carry a purchase budget and keep
// access cost out of the objective; soft variants price each purchased view.
// The Flsv variants add the switch-escape term to every peer cost.
enum class Problem { IflsH, IflsS, FlsvH, FlsvS };

inline bool uses_reconfig(Problem p) {
  return p == Problem::FlsvH || p == Problem::FlsvS;
}
inline bool uses_access(Problem p) {
  return p == Problem::IflsS || p == Problem::FlsvS;
}
inline bool hard_budget(Problem p) {
  return p == Problem::IflsH || p == Problem::FlsvH;
}

inline std::string to_string(Problem p) {
  switch (p) {
    case Problem::IflsH: return "ifls-h";
    case Problem::IflsS: return "ifls-s";
    case Problem::FlsvH: return "flsv-h";
    case Problem::FlsvS: return "flsv-s";
  }
  return "?";
}

inline Problem problem_from_string(const std::string& s) {
  if (s == "ifls-h") return Problem::IflsH;
  if (s == "ifls-s") return Problem::IflsS;
  if (s == "flsv-h") return Problem::FlsvH;
  if (s == "flsv-s") return Problem::FlsvS;
  throw ParseError("unknown problem mode: " + s);
}

// Per-virtual-view rate, either uniform or tabulated per grid point.
struct ViewRate {
  double uniform = 0.0;
  std::vector<double> table;  // empty => uniform value everywhere

  static ViewRate constant(double v) { return ViewRate{v, {}}; }

  double at(int k) const {
    if (table.empty()) return uniform;
    return table.at(static_cast<std::size_t>(k));
  }
};

// All model constants.
struct CostParams {
  double access_price = 5.0;          // per purchased camera view
  double reconfig_weight = 1.0;       // weight of the escape term
  double stay_prob = 0.4;             // per-step probability of staying put
  int horizon = 6;                    // number of view switches considered
  std::optional<int> budget;          // max purchased views in hard variants
  double dist_scale = 1.0;            // multiplicative distortion constant
  ViewRate dist_span_rate = ViewRate::constant(0.05);  // growth per anchor-span unit
  ViewRate dist_gap_rate = ViewRate::constant(0.5);    // growth per view-gap unit

  void validate(const ViewGrid& grid) const {
    if (access_price < 0) throw InvalidArgument("CostParams: access_price < 0");
    if (reconfig_weight < 0) throw InvalidArgument("CostParams: reconfig_weight < 0");
    if (stay_prob < 0.0 || stay_prob > 1.0)
      throw InvalidArgument("CostParams: stay_prob outside [0,1]");
    if (horizon < 1) throw InvalidArgument("CostParams: horizon < 1");
    if (dist_scale <= 0) throw InvalidArgument("CostParams: dist_scale <= 0");
    if (budget && (*budget < 2 || *budget > grid.cameras()))
      throw InvalidArgument("CostParams: budget outside [2, cameras]");
    if (!dist_span_rate.table.empty() &&
        dist_span_rate.table.size() != static_cast<std::size_t>(grid.points()))
      throw InvalidArgument("CostParams: span-rate table size mismatch");
    if (!dist_gap_rate.table.empty() &&
        dist_gap_rate.table.size() != static_cast<std::size_t>(grid.points()))
      throw InvalidArgument("CostParams: gap-rate table size mismatch");
  }
};

}  // namespace fvv
