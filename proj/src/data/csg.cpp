#include "ndc/data/csg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "ndc/rng.hpp"

namespace ndc::data {

CsgNode csg_sphere(const Vec3& center, double radius) {
  CsgNode n;
  n.type = CsgType::Sphere;
  n.center = center;
  n.radius = radius;
  return n;
}

CsgNode csg_box(const Vec3& center, const Vec3& half, const Eigen::Matrix3d& rotation) {
  CsgNode n;
  n.type = CsgType::Box;
  n.center = center;
  n.half = half;
  n.rotation = rotation;
  return n;
}

CsgNode csg_cylinder(const Vec3& center, const Vec3& axis, double radius, double height) {
  CsgNode n;
  n.type = CsgType::Cylinder;
  n.center = center;
  n.axis = axis;
  n.radius = radius;
  n.height = height;
  return n;
}

namespace {

CsgNode boolean(CsgType type, std::vector<CsgNode> children) {
  CsgNode n;
  n.type = type;
  n.children = std::move(children);
  return n;
}

}  // namespace

CsgNode csg_union(std::vector<CsgNode> children) { return boolean(CsgType::Union, std::move(children)); }
CsgNode csg_intersect(std::vector<CsgNode> children) {
  return boolean(CsgType::Intersect, std::move(children));
}
CsgNode csg_subtract(CsgNode a, CsgNode b) {
  std::vector<CsgNode> c;
  c.push_back(std::move(a));
  c.push_back(std::move(b));
  return boolean(CsgType::Subtract, std::move(c));
}

void validate_csg(const CsgNode& node) {
  auto fail = [](const char* what) { throw Error(ErrorCode::ShapeError, std::string("csg: ") + what); };
  switch (node.type) {
    case CsgType::Sphere:
      if (!(node.radius > 0.0)) fail("sphere radius must be positive");
      break;
    case CsgType::Box:
      if (!(node.half.minCoeff() > 0.0)) fail("box half extents must be positive");
      if (!(node.rotation.transpose() * node.rotation).isApprox(Eigen::Matrix3d::Identity(), 1e-6) ||
          std::abs(node.rotation.determinant() - 1.0) > 1e-6)
        fail("box rotation is not orthonormal");
      break;
    case CsgType::Cylinder:
      if (!(node.radius > 0.0) || !(node.height > 0.0)) fail("cylinder sizes must be positive");
      if (std::abs(node.axis.norm() - 1.0) > 1e-6) fail("cylinder axis is not unit length");
      break;
    case CsgType::Union:
    case CsgType::Intersect:
      if (node.children.empty()) fail("boolean without children");
      break;
    case CsgType::Subtract:
      if (node.children.size() != 2) fail("subtract needs exactly two children");
      break;
  }
  for (const auto& c : node.children) validate_csg(c);
}

double csg_sdf_eval(const CsgNode& node, const Vec3& p) {
  switch (node.type) {
    case CsgType::Sphere:
      return (p - node.center).norm() - node.radius;
    case CsgType::Box: {
      const Vec3 q = (node.rotation.transpose() * (p - node.center)).cwiseAbs() - node.half;
      return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
    }
    case CsgType::Cylinder: {
      const Vec3 d = p - node.center;
      const double along = d.dot(node.axis);
      const double radial = (d - along * node.axis).norm();
      const double dr = radial - node.radius;
      const double dh = std::abs(along) - 0.5 * node.height;
      return std::hypot(std::max(dr, 0.0), std::max(dh, 0.0)) + std::min(std::max(dr, dh), 0.0);
    }
    case CsgType::Union: {
      double v = csg_sdf_eval(node.children[0], p);
      for (std::size_t i = 1; i < node.children.size(); ++i) v = std::min(v, csg_sdf_eval(node.children[i], p));
      return v;
    }
    case CsgType::Intersect: {
      double v = csg_sdf_eval(node.children[0], p);
      for (std::size_t i = 1; i < node.children.size(); ++i) v = std::max(v, csg_sdf_eval(node.children[i], p));
      return v;
    }
    case CsgType::Subtract:
      return std::max(csg_sdf_eval(node.children[0], p), -csg_sdf_eval(node.children[1], p));
  }
  return 0.0;
}

Vec3 csg_gradient(const CsgNode& node, const Vec3& p) {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 lo = p, hi = p;
    lo[a] -= kCsgGradientStep;
    hi[a] += kCsgGradientStep;
    g[a] = (csg_sdf_eval(node, hi) - csg_sdf_eval(node, lo)) / (2.0 * kCsgGradientStep);
  }
  return g;
}

ScalarGrid sample_csg_grid(const CsgNode& node, const GridDims& dims, FieldKind kind) {
  if (kind == FieldKind::OCC) throw Error(ErrorCode::InvalidKind, "sample_csg_grid samples distances only");
  dims.validate();
  ScalarGrid g(dims, kind);
  for_each_index(dims.vertex_shape(), [&](int i, int j, int l) {
    const double v = csg_sdf_eval(node, Vec3(i, j, l));
    g.at(i, j, l) = kind == FieldKind::UDF ? std::abs(v) : v;
  });
  return g;
}

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Primitive whose bounding sphere stays `margin` inside the lattice box.
CsgNode random_primitive(const GridDims& dims, double margin, std::mt19937_64& rng) {
  const Vec3 extent(dims.m - 1, dims.n - 1, dims.k - 1);
  const double span = extent.minCoeff() - 2.0 * margin;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int kind = int(rng() % 3);
  const double size = span * (0.12 + 0.18 * u(rng));
  CsgNode n;
  double bound = size;
  if (kind == 0) {
    n = csg_sphere(Vec3::Zero(), size);
  } else if (kind == 1) {
    const Vec3 half = size * Vec3(0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng));
    n = csg_box(Vec3::Zero(), half, random_rotation(rng));
    bound = half.norm();
  } else {
    const double r = size * (0.4 + 0.4 * u(rng));
    const double h = size * (1.0 + u(rng));
    n = csg_cylinder(Vec3::Zero(), random_rotation(rng).col(2), r, h);
    bound = std::hypot(r, 0.5 * h);
  }
  bound = std::min(bound, 0.5 * span);
  for (int a = 0; a < 3; ++a) {
    const double lo = margin + bound, hi = extent[a] - margin - bound;
    n.center[a] = lo + (hi - lo) * u(rng);
  }
  return n;
}

bool usable(const CsgNode& node, const GridDims& dims) {
  const ScalarGrid g = sample_csg_grid(node, dims);
  bool inside = false;
  bool border_clear = true;
  for_each_index(dims.vertex_shape(), [&](int i, int j, int l) {
    const bool in = g.at(i, j, l) < 0.0;
    inside = inside || in;
    const bool border = i == 0 || j == 0 || l == 0 || i == dims.m - 1 || j == dims.n - 1 || l == dims.k - 1;
    if (border && in) border_clear = false;
  });
  return inside && border_clear;
}

}  // namespace

CsgNode random_csg_scene(const GridDims& dims, std::uint64_t seed, double margin) {
  dims.validate();
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    std::mt19937_64 rng(derive_seed(seed, attempt));
    const int count = 1 + int(rng() % 4);
    CsgNode scene = random_primitive(dims, margin, rng);
    for (int p = 1; p < count; ++p) {
      CsgNode prim = random_primitive(dims, margin, rng);
      const std::uint64_t op = rng() % 20;
      if (op < 12) {
        scene = csg_union({std::move(scene), std::move(prim)});
      } else if (op < 17) {
        scene = csg_subtract(std::move(scene), std::move(prim));
      } else {
        scene = csg_intersect({std::move(scene), std::move(prim)});
      }
    }
    if (usable(scene, dims)) return scene;
  }
  throw Error(ErrorCode::ShapeError, "random_csg_scene found no usable scene");
}

}  // namespace ndc::data
