#pragma once

#include <vector>

#include "ndc/grid.hpp"

namespace ndc {

/// Points in grid (cell) units with optional per-point feature channels,
/// stored row-major (point, channel).
struct PointCloud {
  std::vector<Vec3> points;
  int feature_channels = 0;
  std::vector<double> features;

  std::size_t size() const { return points.size(); }
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

}  // namespace ndc
