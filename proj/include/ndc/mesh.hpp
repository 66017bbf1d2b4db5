#pragma once

#include <array>
#include <cstdint>
#include <Eigen/Geometry>
#include <vector>

#include "ndc/grid.hpp"

namespace ndc {

/// Quad mesh; the face normal follows the right-hand rule over the index order.
struct QuadMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> quads;

  bool empty() const { return quads.empty(); }
  friend bool operator==(const QuadMesh&, const QuadMesh&) = default;
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  friend bool operator==(const TriMesh&, const TriMesh&) = default;
};

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

/// Splits every quad along its 0-2 diagonal.
TriMesh triangulate_fixed(const QuadMesh& mesh);

/// Area-weighted uniform surface samples with the triangle each came from.
/// Degenerate triangles are never chosen; a mesh without area yields none.
struct SurfaceSamples {
  std::vector<Vec3> points;
  std::vector<int> triangles;
};

SurfaceSamples sample_triangles(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace ndc
