#include "ndc/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace ndc {

namespace {

constexpr int kLeafSize = 8;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<int>(points_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1, Vec3::Zero(), Vec3::Zero()});
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int p = begin; p < end; ++p) {
    lo = lo.cwiseMin(points_[order_[p]]);
    hi = hi.cwiseMax(points_[order_[p]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::box_distance(const Node& node, const Vec3& q) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double below = node.lo[a] - q[a];
    const double above = q[a] - node.hi[a];
    const double gap = std::max({below, above, 0.0});
    d += gap * gap;
  }
  return d;
}

Neighbor KdTree::nearest(const Vec3& query) const {
  auto result = knn(query, 1);
  return result.empty() ? Neighbor{-1, std::numeric_limits<double>::infinity()} : result.front();
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, int k) const {
  std::vector<Neighbor> best;
  if (nodes_.empty() || k <= 0) return best;
  best.reserve(k + 1);

  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (static_cast<int>(best.size()) == k && box_distance(node, query) > best.back().sq_dist)
      continue;
    if (node.left < 0) {
      for (int p = node.begin; p < node.end; ++p) {
        const int idx = order_[p];
        const Neighbor cand{idx, squared_distance(points_[idx], query)};
        if (static_cast<int>(best.size()) == k && !closer(cand, best.back())) continue;
        best.insert(std::upper_bound(best.begin(), best.end(), cand, closer), cand);
        if (static_cast<int>(best.size()) > k) best.pop_back();
      }
      continue;
    }
    // Visit the nearer child first.
    const double dl = box_distance(nodes_[node.left], query);
    const double dr = box_distance(nodes_[node.right], query);
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

std::vector<int> KdTree::within_radius(const Vec3& query, double radius) const {
  std::vector<int> out;
  if (nodes_.empty()) return out;
  const double r2 = radius * radius;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance(node, query) > r2) continue;
    if (node.left < 0) {
      for (int p = node.begin; p < node.end; ++p) {
        const int idx = order_[p];
        if (squared_distance(points_[idx], query) <= r2) out.push_back(idx);
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ndc
