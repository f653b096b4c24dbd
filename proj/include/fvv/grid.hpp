#pragma once

#include <cmath>
#include <vector>

#include "fvv/errors.hpp"

namespace fvv {

// One-dimensional lattice of viewpoints: V equally spaced cameras at the
// integer views 1..V, with K subdivisions between consecutive cameras.
// Grid point k = 0..(V-1)*K carries the view value 1 + k/K; camera v sits
// at grid point (v-1)*K, so every camera view is itself a grid point.
class ViewGrid {
 public:
  ViewGrid(int cameras, int subdivisions)
      : cameras_(cameras), subdivisions_(subdivisions) {
    if (cameras < 2) throw InvalidArgument("ViewGrid: need at least 2 cameras");
    if (subdivisions < 1) throw InvalidArgument("ViewGrid: need subdivisions >= 1");
  }

  int cameras() const { return cameras_; }
  int subdivisions() const { return subdivisions_; }
  int points() const { return (cameras_ - 1) * subdivisions_ + 1; }

  bool valid_point(int k) const { return k >= 0 && k < points(); }
  bool valid_camera(int v) const { return v >= 1 && v <= cameras_; }

  double view_of(int k) const {
    return 1.0 + static_cast<double>(k) / subdivisions_;
  }
  int camera_point(int v) const { return (v - 1) * subdivisions_; }
  bool is_camera_point(int k) const { return k % subdivisions_ == 0; }

  // Largest camera whose view is <= the view of grid point k.
  int floor_camera(int k) const { return k / subdivisions_ + 1; }
  // Smallest camera whose view is >= the view of grid point k.
  int ceil_camera(int k) const {
    return (k + subdivisions_ - 1) / subdivisions_ + 1;
  }

  // Nearest grid point for a continuous view value, clamped to the lattice.
  int nearest_point(double view) const {
    long k = std::lround((view - 1.0) * subdivisions_);
    if (k < 0) k = 0;
    if (k >= points()) k = points() - 1;
    return static_cast<int>(k);
  }

  // All view values on the lattice, in increasing order.
  std::vector<double> virtual_views() const {
    std::vector<double> out;
    out.reserve(points());
    for (int k = 0; k < points(); ++k) out.push_back(view_of(k));
    return out;
  }

  bool operator==(const ViewGrid& other) const {
    return cameras_ == other.cameras_ && subdivisions_ == other.subdivisions_;
  }

 private:
  int cameras_;
  int subdivisions_;
};

}  // namespace fvv
