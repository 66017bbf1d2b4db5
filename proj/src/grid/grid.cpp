#include "ndc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ndc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidKind: return "InvalidKind";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::NoConstraints: return "NoConstraints";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::OpenMeshError: return "OpenMeshError";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidTransform: return "InvalidTransform";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TrainingDiverged: return "TrainingDiverged";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void GridDims::validate() const {
  if (!valid())
    throw Error(ErrorCode::InvalidDims, "grid needs >= 2 vertices per axis, got " +
                                            std::to_string(m) + "x" + std::to_string(n) + "x" +
                                            std::to_string(k));
}

void ScalarGrid::validate() const {
  dims.validate();
  if (values.size() != dims.vertex_count())
    throw Error(ErrorCode::ShapeError, "value count does not match grid dims");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidKind, "non-finite grid value");
    if (kind == FieldKind::UDF && v < 0.0)
      throw Error(ErrorCode::InvalidKind, "negative value in unsigned distance grid");
    if (kind == FieldKind::OCC && v != 0.0 && v != 1.0)
      throw Error(ErrorCode::InvalidKind, "occupancy values must be 0 or 1");
  }
}

bool is_interior_edge(const GridDims& dims, int axis, int i, int j, int l) {
  if (!dims.contains_edge(axis, i, j, l)) return false;
  const Index3 v{i, j, l};
  for (int b = 0; b < 3; ++b) {
    if (b == axis) continue;
    if (v[b] < 1 || v[b] > dims.count(b) - 2) return false;
  }
  return true;
}

std::array<Index3, 4> cells_around_edge(int axis, int i, int j, int l) {
  // (axis, b, c) is a right-handed frame; seen from +axis, b points right and
  // c points up, so this order is counter-clockwise.
  const int b = (axis + 1) % 3;
  const int c = (axis + 2) % 3;
  static constexpr int kDb[4] = {-1, 0, 0, -1};
  static constexpr int kDc[4] = {-1, -1, 0, 0};
  std::array<Index3, 4> out{};
  for (int q = 0; q < 4; ++q) {
    Index3 cell{i, j, l};
    cell[b] += kDb[q];
    cell[c] += kDc[q];
    out[q] = cell;
  }
  return out;
}

const std::array<CellEdge, 12>& cell_edges() {
  static const std::array<CellEdge, 12> edges = [] {
    std::array<CellEdge, 12> e{};
    int n = 0;
    for (int axis = 0; axis < 3; ++axis) {
      const int b = (axis + 1) % 3;
      const int c = (axis + 2) % 3;
      for (int q = 0; q < 4; ++q) {
        Index3 v{0, 0, 0};
        v[b] = q & 1;
        v[c] = q >> 1;
        e[n++] = CellEdge{axis, v};
      }
    }
    return e;
  }();
  return edges;
}

namespace {

void require_sdf(const ScalarGrid& grid, const char* op) {
  if (grid.kind != FieldKind::SDF)
    throw Error(ErrorCode::InvalidKind, std::string(op) + " requires a signed distance grid");
  grid.dims.validate();
  if (grid.values.size() != grid.dims.vertex_count())
    throw Error(ErrorCode::ShapeError, "value count does not match grid dims");
}

}  // namespace

SignGrid signs_from_scalar(const ScalarGrid& grid, double iso) {
  require_sdf(grid, "signs_from_scalar");
  SignGrid signs(grid.dims, 0);
  for (std::size_t v = 0; v < grid.values.size(); ++v) signs.data[v] = grid.values[v] < iso ? 1 : 0;
  return signs;
}

EdgeField<std::optional<double>> edge_crossings_linear(const ScalarGrid& grid) {
  require_sdf(grid, "edge_crossings_linear");
  const GridDims& d = grid.dims;
  EdgeField<std::optional<double>> out(d);
  for (int a = 0; a < 3; ++a) {
    const Index3 step = axis_step(a);
    for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
      const double p = grid.at(i, j, l);
      const double q = grid.at(i + step[0], j + step[1], l + step[2]);
      if ((p < 0.0) != (q < 0.0)) out.at(a, i, j, l) = p / (p - q);
    });
  }
  return out;
}

FlagField xor_flags(const SignGrid& signs) {
  const GridDims& d = signs.dims;
  FlagField out(d, 0);
  for (int a = 0; a < 3; ++a) {
    const Index3 step = axis_step(a);
    for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
      out.at(a, i, j, l) = signs.at(i, j, l) != signs.at(i + step[0], j + step[1], l + step[2]);
    });
  }
  return out;
}

GradientField central_gradients(const ScalarGrid& grid) {
  require_sdf(grid, "central_gradients");
  const GridDims& d = grid.dims;
  if (d.m < 3 || d.n < 3 || d.k < 3)
    throw Error(ErrorCode::InvalidDims, "central_gradients needs >= 3 vertices per axis");

  GradientField out{VertexField<Vec3>(d, Vec3::Zero()), 0};
  for_each_index(d.vertex_shape(), [&](int i, int j, int l) {
    const Index3 v{i, j, l};
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
      Index3 lo = v, hi = v;
      double span = 2.0;
      if (v[a] == 0) {
        hi[a] += 1;
        span = 1.0;
      } else if (v[a] == d.count(a) - 1) {
        lo[a] -= 1;
        span = 1.0;
      } else {
        lo[a] -= 1;
        hi[a] += 1;
      }
      g[a] = (grid.at(hi[0], hi[1], hi[2]) - grid.at(lo[0], lo[1], lo[2])) / span;
    }
    if (g.squaredNorm() == 0.0) {
      g = Vec3::UnitX();
      ++out.degenerate;
    }
    out.gradients.at(i, j, l) = g;
  });
  return out;
}

EdgeField<Vec3> interpolate_edge_normals(const EdgeField<std::optional<double>>& crossings,
                                         const VertexField<Vec3>& gradients) {
  const GridDims& d = crossings.dims;
  EdgeField<Vec3> out(d, Vec3::Zero());
  for (int a = 0; a < 3; ++a) {
    const Index3 step = axis_step(a);
    for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
      const auto& t = crossings.at(a, i, j, l);
      if (!t) return;
      const Vec3& g0 = gradients.at(i, j, l);
      const Vec3& g1 = gradients.at(i + step[0], j + step[1], l + step[2]);
      Vec3 n = (1.0 - *t) * g0 + *t * g1;
      const double len = n.norm();
      out.at(a, i, j, l) = len > 0.0 ? Vec3(n / len) : Vec3(Vec3::UnitX());
    });
  }
  return out;
}

CellField<std::uint8_t> cells_near_points(const GridDims& lattice, const std::vector<Vec3>& points,
                                          int radius) {
  const Index3 cs = lattice.cell_shape();
  CellField<std::uint8_t> seeds(lattice, 0);
  for (const Vec3& p : points) {
    Index3 c;
    for (int a = 0; a < 3; ++a) c[a] = int(std::clamp(std::floor(p[a]), 0.0, double(cs[a] - 1)));
    seeds.at(c[0], c[1], c[2]) = 1;
  }
  CellField<std::uint8_t> out(lattice, 0);
  for_each_index(cs, [&](int i, int j, int l) {
    if (!seeds.at(i, j, l)) return;
    for (int dz = -radius; dz <= radius; ++dz)
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          if (std::abs(dx) + std::abs(dy) + std::abs(dz) > radius) continue;
          if (lattice.contains_cell(i + dx, j + dy, l + dz)) out.at(i + dx, j + dy, l + dz) = 1;
        }
  });
  return out;
}

}  // namespace ndc
