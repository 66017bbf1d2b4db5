#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ndc/grid.hpp"

namespace ndc {

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct Neighbor {
  int index;
  double sq_dist;
};

/// Static 3-d tree over a point set. Equal distances are resolved in favour
/// of the smaller point index, so results do not depend on input order beyond
/// the indices themselves.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }

  Neighbor nearest(const Vec3& query) const;
  /// The k nearest points sorted by (distance, index). Returns fewer when the
  /// tree holds fewer than k points.
  std::vector<Neighbor> knn(const Vec3& query, int k) const;
  /// All points with squared distance <= radius^2, in index order.
  std::vector<int> within_radius(const Vec3& query, double radius) const;

 private:
  struct Node {
    int begin, end;   // range in order_
    int left, right;  // child nodes, -1 for leaves
    Vec3 lo, hi;      // bounding box
  };

  int build(int begin, int end);
  static double box_distance(const Node& node, const Vec3& q);

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace ndc
