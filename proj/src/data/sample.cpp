#include "ndc/data/sample.hpp"

#include <cmath>
#include <random>

#include "ndc/data/mesh_field.hpp"
#include "ndc/rng.hpp"

namespace ndc::data {

std::string to_string(SampleKind kind) {
  switch (kind) {
    case SampleKind::SDF: return "sdf";
    case SampleKind::UDF: return "udf";
    case SampleKind::OCC: return "occ";
    case SampleKind::POINTS: return "points";
  }
  return "?";
}

SampleKind sample_kind_from_string(const std::string& name) {
  if (name == "sdf") return SampleKind::SDF;
  if (name == "udf") return SampleKind::UDF;
  if (name == "occ" || name == "voxel") return SampleKind::OCC;
  if (name == "points") return SampleKind::POINTS;
  throw Error(ErrorCode::InvalidKind, "unknown sample kind '" + name + "'");
}

double quantize_dyadic(double x) {
  constexpr double scale = 16777216.0;  // 2^24
  return std::round(x * scale) / scale;
}

namespace {

bool is_csg(const Shape& s) { return std::holds_alternative<CsgNode>(s); }

SignGrid signs_of(const ScalarGrid& g) { return signs_from_scalar(g); }

EdgeHermite csg_edge_data(const CsgNode& node, const SignGrid& signs) {
  const GridDims& d = signs.dims;
  EdgeHermite h{xor_flags(signs), EdgeField<double>(d, 0.0), EdgeField<Vec3>(d, Vec3::Zero())};
  for (int a = 0; a < 3; ++a) {
    const Index3 step = axis_step(a);
    const Vec3 dir(step[0], step[1], step[2]);
    for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
      if (!h.flags.at(a, i, j, l)) return;
      const Vec3 p0(i, j, l);
      const bool lower_inside = signs.at(i, j, l) != 0;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < kBisectionIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((csg_sdf_eval(node, p0 + mid * dir) < 0.0) == lower_inside)
          lo = mid;
        else
          hi = mid;
      }
      const double t = 0.5 * (lo + hi);
      const Vec3 g = csg_gradient(node, p0 + t * dir);
      const double len = g.norm();
      Vec3 n = Vec3::Zero();
      if (len > 0.0 && std::isfinite(len)) {
        n = g / len;
      } else {
        n[a] = lower_inside ? 1.0 : -1.0;
      }
      h.t.at(a, i, j, l) = t;
      h.normals.at(a, i, j, l) = n;
    });
  }
  return h;
}

}  // namespace

ScalarGrid shape_distance_grid(const Shape& shape, const GridDims& dims, FieldKind kind) {
  ScalarGrid g = is_csg(shape) ? sample_csg_grid(std::get<CsgNode>(shape), dims, kind)
                               : mesh_to_sdf_grid(std::get<TriMesh>(shape), dims, kind);
  for (double& v : g.values) v = double(float(v));
  return g;
}

bool shape_contains(const Shape& shape, const Vec3& p) {
  if (is_csg(shape)) return csg_sdf_eval(std::get<CsgNode>(shape), p) < 0.0;
  const TriMesh& mesh = std::get<TriMesh>(shape);
  if (!is_watertight(mesh)) throw Error(ErrorCode::OpenMeshError, "inside test on a mesh that is not watertight");
  return inside_mesh(mesh, p);
}

GtEdgeData gt_edge_data(const Shape& shape, const GridDims& dims, const SignGrid* signs) {
  dims.validate();
  GtEdgeData out;
  if (is_csg(shape)) {
    out.signs = signs ? *signs : signs_of(shape_distance_grid(shape, dims, FieldKind::SDF));
    out.hermite = csg_edge_data(std::get<CsgNode>(shape), out.signs);
    return out;
  }
  const TriMesh& mesh = std::get<TriMesh>(shape);
  out.watertight = is_watertight(mesh);
  if (out.watertight) {
    out.signs = signs ? *signs : signs_of(mesh_to_sdf_grid(mesh, dims, FieldKind::SDF));
    out.hermite = mesh_edge_data(mesh, dims, &out.signs);
  } else {
    out.signs = SignGrid(dims, 0);
    out.hermite = mesh_edge_data(mesh, dims, nullptr);
  }
  return out;
}

CellVertices pseudo_gt_vertices(const EdgeHermite& hermite) {
  CellVertices v = qef_cell_vertices(hermite);
  for (Vec3& o : v.offsets.data)
    for (int a = 0; a < 3; ++a) o[a] = quantize_dyadic(o[a]);
  return v;
}

MaskGrids build_masks(const TrainingSample& s) {
  const GridDims& d = s.lattice;
  MaskGrids m(d);
  for_each_index(d.cell_shape(), [&](int i, int j, int l) {
    bool any_in = false, any_out = false;
    for (int c = 0; c < 8; ++c) {
      const Index3 o = corner_offset(c);
      (s.gt_signs.at(i + o[0], j + o[1], l + o[2]) ? any_in : any_out) = true;
    }
    m.cells_ndc.at(i, j, l) = any_in && any_out;
    for (const CellEdge& ce : cell_edges())
      if (s.gt_flags.at(ce.axis, i + ce.vertex[0], j + ce.vertex[1], l + ce.vertex[2])) {
        m.cells_undc.at(i, j, l) = 1;
        break;
      }
  });

  auto mark_corners = [&](int i, int j, int l) {
    for (int c = 0; c < 8; ++c) {
      const Index3 o = corner_offset(c);
      m.signs.at(i + o[0], j + o[1], l + o[2]) = 1;
    }
  };

  switch (s.kind) {
    case SampleKind::SDF:
    case SampleKind::UDF:
      for_each_index(d.cell_shape(), [&](int i, int j, int l) {
        if (m.cells_ndc.at(i, j, l)) mark_corners(i, j, l);
      });
      for (int a = 0; a < 3; ++a) {
        const Index3 st = axis_step(a);
        for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
          m.edges.at(a, i, j, l) =
              std::abs(s.grid.at(i, j, l)) < 1.0 && std::abs(s.grid.at(i + st[0], j + st[1], l + st[2])) < 1.0;
        });
      }
      break;
    case SampleKind::OCC: {
      const GridDims& vd = s.grid.dims;  // voxel (i, j, l) = lattice cell (i, j, l)
      auto occupied = [&](int i, int j, int l) {
        return vd.contains_vertex(i, j, l) && s.grid.at(i, j, l) > 0.5;
      };
      for_each_index(vd.vertex_shape(), [&](int i, int j, int l) {
        if (!occupied(i, j, l)) return;
        bool exposed = false;
        for (int dz = -1; dz <= 1 && !exposed; ++dz)
          for (int dy = -1; dy <= 1 && !exposed; ++dy)
            for (int dx = -1; dx <= 1 && !exposed; ++dx)
              if ((dx || dy || dz) && !occupied(i + dx, j + dy, l + dz)) exposed = true;
        if (exposed) mark_corners(i, j, l);
      });
      for (int a = 0; a < 3; ++a)
        for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
          if (!is_interior_edge(d, a, i, j, l)) return;
          bool all = true;
          for (const Index3& c : cells_around_edge(a, i, j, l)) all = all && occupied(c[0], c[1], c[2]);
          m.edges.at(a, i, j, l) = all;
        });
      break;
    }
    case SampleKind::POINTS: {
      for_each_index(d.cell_shape(), [&](int i, int j, int l) {
        if (m.cells_ndc.at(i, j, l)) mark_corners(i, j, l);
      });
      const CellField<std::uint8_t> active = cells_near_points(d, s.cloud.points, 3);
      for_each_index(d.cell_shape(), [&](int i, int j, int l) {
        if (!active.at(i, j, l)) return;
        for (int a = 0; a < 3; ++a) m.edges.at(a, i, j, l) = 1;
      });
      break;
    }
  }
  return m;
}

PointCloud sample_point_cloud(const Shape& shape, const GridDims& region, std::size_t n, double sigma,
                              std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::ShapeError, "sample_point_cloud needs n >= 1");
  PointCloud cloud;
  if (!is_csg(shape)) {
    const SurfaceSamples s = sample_triangles(std::get<TriMesh>(shape), n, derive_seed(seed, 1));
    if (s.points.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no area to sample");
    cloud.points = s.points;
  } else {
    const CsgNode& node = std::get<CsgNode>(shape);
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec3 extent(region.m - 1, region.n - 1, region.k - 1);
    std::size_t tries = 0;
    while (cloud.points.size() < n) {
      if (++tries > 10000 * n + 1000000)
        throw Error(ErrorCode::EmptyMesh, "CSG surface not found inside the sampling region");
      Vec3 p(u(rng) * extent[0], u(rng) * extent[1], u(rng) * extent[2]);
      if (std::abs(csg_sdf_eval(node, p)) > 1.0) continue;
      bool converged = false;
      for (int it = 0; it < 20; ++it) {
        const double f = csg_sdf_eval(node, p);
        if (std::abs(f) < 1e-10) {
          converged = true;
          break;
        }
        const Vec3 g = csg_gradient(node, p);
        const double g2 = g.squaredNorm();
        if (!(g2 > 1e-12)) break;
        p -= (f / g2) * g;
      }
      if (converged) cloud.points.push_back(p);
    }
  }
  std::mt19937_64 noise(derive_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Vec3& p : cloud.points) {
    if (sigma > 0.0)
      for (int a = 0; a < 3; ++a) p[a] += sigma * gauss(noise);
    for (int a = 0; a < 3; ++a) p[a] = quantize_dyadic(p[a]);
  }
  return cloud;
}

TrainingSample make_sample(const Shape& shape, SampleKind kind, const GridDims& lattice,
                           const SampleOptions& options) {
  lattice.validate();
  TrainingSample s;
  s.kind = kind;
  s.lattice = lattice;
  const bool watertight = is_csg(shape) || is_watertight(std::get<TriMesh>(shape));
  if ((kind == SampleKind::SDF || kind == SampleKind::OCC) && !watertight)
    throw Error(ErrorCode::OpenMeshError, to_string(kind) + " sample needs a watertight source");
  s.watertight = watertight;

  const ScalarGrid dist = shape_distance_grid(shape, lattice, watertight ? FieldKind::SDF : FieldKind::UDF);
  const SignGrid signs = watertight ? signs_from_scalar(dist) : SignGrid(lattice, 0);
  switch (kind) {
    case SampleKind::SDF:
      s.grid = dist;
      break;
    case SampleKind::UDF:
      s.grid = dist;
      s.grid.kind = FieldKind::UDF;
      for (double& v : s.grid.values) v = std::abs(v);
      break;
    case SampleKind::OCC: {
      if (!(lattice.m >= 3 && lattice.n >= 3 && lattice.k >= 3))
        throw Error(ErrorCode::InvalidDims, "voxel samples need at least 3 lattice vertices per axis");
      const GridDims vd{lattice.m - 1, lattice.n - 1, lattice.k - 1};
      s.grid = ScalarGrid(vd, FieldKind::OCC);
      for_each_index(vd.vertex_shape(), [&](int i, int j, int l) {
        s.grid.at(i, j, l) = shape_contains(shape, Vec3(i + 0.5, j + 0.5, l + 0.5)) ? 1.0 : 0.0;
      });
      break;
    }
    case SampleKind::POINTS:
      s.cloud = sample_point_cloud(shape, lattice, options.points, options.noise_sigma, options.seed);
      s.grid = ScalarGrid();  // no grid input; values stay empty
      break;
  }

  const GtEdgeData gt = gt_edge_data(shape, lattice, watertight ? &signs : nullptr);
  s.gt_signs = gt.signs;
  s.gt_flags = gt.hermite.flags;
  s.gt_offsets = pseudo_gt_vertices(gt.hermite).offsets;
  s.masks = build_masks(s);
  return s;
}

void validate_sample(const TrainingSample& s) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ShapeError, "sample: " + what); };
  const GridDims& d = s.lattice;
  if (s.gt_signs.dims != d || s.gt_flags.dims != d || s.gt_offsets.dims != d) fail("GT dims differ from lattice");
  if (s.masks.signs.dims != d || s.masks.cells_ndc.dims != d || s.masks.cells_undc.dims != d ||
      s.masks.edges.dims != d)
    fail("mask dims differ from lattice");
  if (s.kind == SampleKind::OCC) {
    if (s.grid.lattice_dims() != d || s.grid.kind != FieldKind::OCC) fail("voxel grid does not match lattice");
  } else if (s.kind != SampleKind::POINTS) {
    if (s.grid.dims != d) fail("input grid does not match lattice");
  }
  if (s.watertight && xor_flags(s.gt_signs) != s.gt_flags) fail("gt_flags differ from xor(gt_signs)");
  for (std::size_t c = 0; c < s.gt_offsets.data.size(); ++c) {
    if (!s.masks.cells_ndc.data[c] && !s.masks.cells_undc.data[c]) continue;
    const Vec3& o = s.gt_offsets.data[c];
    if (!(o.minCoeff() >= 0.0 && o.maxCoeff() <= 1.0)) fail("offset outside [0,1]^3 on a masked cell");
  }
}

}  // namespace ndc::data
