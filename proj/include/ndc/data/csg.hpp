#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ndc/grid.hpp"

namespace ndc::data {

enum class CsgType : std::uint8_t { Sphere, Box, Cylinder, Union, Intersect, Subtract };

/// Value-type CSG tree in grid units. Primitives:
///   Sphere   center, radius
///   Box      center, half, rotation (local = R^T (p - center))
///   Cylinder center, axis (unit), radius, height (full length along axis)
/// Booleans combine `children`: Union = min, Intersect = max,
/// Subtract = max(a, -b) over exactly two children.
struct CsgNode {
  CsgType type = CsgType::Sphere;
  Vec3 center = Vec3::Zero();
  Vec3 half = Vec3::Ones();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 axis = Vec3::UnitZ();
  double radius = 1.0;
  double height = 1.0;
  std::vector<CsgNode> children;
};

CsgNode csg_sphere(const Vec3& center, double radius);
CsgNode csg_box(const Vec3& center, const Vec3& half,
                const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity());
CsgNode csg_cylinder(const Vec3& center, const Vec3& axis, double radius, double height);
CsgNode csg_union(std::vector<CsgNode> children);
CsgNode csg_intersect(std::vector<CsgNode> children);
CsgNode csg_subtract(CsgNode a, CsgNode b);

/// Throws ShapeError for empty booleans, Subtract without two children,
/// non-orthonormal rotations (1e-6), non-unit axes or non-positive sizes.
void validate_csg(const CsgNode& node);

/// Exact for primitives, a distance bound for booleans.
double csg_sdf_eval(const CsgNode& node, const Vec3& p);

inline constexpr double kCsgGradientStep = 1e-4;

/// Central-difference gradient of csg_sdf_eval with step kCsgGradientStep.
Vec3 csg_gradient(const CsgNode& node, const Vec3& p);

/// Field sampled on the lattice vertices; UDF takes |Φ|.
ScalarGrid sample_csg_grid(const CsgNode& node, const GridDims& dims, FieldKind kind = FieldKind::SDF);

/// 1 to 4 randomly posed primitives joined by boolean operations, kept at
/// least `margin` cells inside the lattice. The shape is non-empty on the
/// lattice and every border vertex is outside.
CsgNode random_csg_scene(const GridDims& dims, std::uint64_t seed, double margin = 2.0);

}  // namespace ndc::data
