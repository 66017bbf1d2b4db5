#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ndc/error.hpp"

namespace ndc {

using Vec3 = Eigen::Vector3d;
using Index3 = std::array<int, 3>;

/// Vertex counts of a regular lattice with unit cells. Vertex (0,0,0) sits at
/// the origin; all positions in the library are expressed in cell units.
///
/// Storage order for every per-vertex, per-cell and per-edge array is x
/// fastest, then y, then z.
struct GridDims {
  int m = 2;
  int n = 2;
  int k = 2;

  static GridDims cube(int r) { return {r, r, r}; }

  int count(int axis) const { return axis == 0 ? m : (axis == 1 ? n : k); }
  Index3 vertex_shape() const { return {m, n, k}; }
  Index3 cell_shape() const { return {m - 1, n - 1, k - 1}; }
  /// Shape of the sub-array holding edges that run along `axis`.
  Index3 edge_shape(int axis) const {
    Index3 s = vertex_shape();
    s[axis] -= 1;
    return s;
  }

  std::size_t vertex_count() const { return std::size_t(m) * n * k; }
  std::size_t cell_count() const { return std::size_t(m - 1) * (n - 1) * (k - 1); }
  std::size_t edge_count(int axis) const {
    const Index3 s = edge_shape(axis);
    return std::size_t(s[0]) * s[1] * s[2];
  }
  std::size_t total_edge_count() const { return edge_count(0) + edge_count(1) + edge_count(2); }

  bool contains_vertex(int i, int j, int l) const {
    return i >= 0 && j >= 0 && l >= 0 && i < m && j < n && l < k;
  }
  bool contains_cell(int i, int j, int l) const {
    return i >= 0 && j >= 0 && l >= 0 && i < m - 1 && j < n - 1 && l < k - 1;
  }
  bool contains_edge(int axis, int i, int j, int l) const {
    const Index3 s = edge_shape(axis);
    return i >= 0 && j >= 0 && l >= 0 && i < s[0] && j < s[1] && l < s[2];
  }

  std::size_t vertex_index(int i, int j, int l) const {
    return std::size_t(i) + std::size_t(m) * (std::size_t(j) + std::size_t(n) * l);
  }
  std::size_t cell_index(int i, int j, int l) const {
    return std::size_t(i) + std::size_t(m - 1) * (std::size_t(j) + std::size_t(n - 1) * l);
  }
  std::size_t edge_index(int axis, int i, int j, int l) const {
    const Index3 s = edge_shape(axis);
    return std::size_t(i) + std::size_t(s[0]) * (std::size_t(j) + std::size_t(s[1]) * l);
  }

  bool valid() const { return m >= 2 && n >= 2 && k >= 2; }
  /// Throws InvalidDims unless every axis has at least two vertices.
  void validate() const;

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// Calls fn(i, j, l) over a box in storage order.
template <class Fn>
void for_each_index(const Index3& shape, Fn&& fn) {
  for (int l = 0; l < shape[2]; ++l)
    for (int j = 0; j < shape[1]; ++j)
      for (int i = 0; i < shape[0]; ++i) fn(i, j, l);
}

template <class T>
struct VertexField {
  GridDims dims;
  std::vector<T> data;

  VertexField() = default;
  explicit VertexField(const GridDims& d, T fill = T{}) : dims(d), data(d.vertex_count(), fill) {}

  T& at(int i, int j, int l) { return data[dims.vertex_index(i, j, l)]; }
  const T& at(int i, int j, int l) const { return data[dims.vertex_index(i, j, l)]; }

  friend bool operator==(const VertexField&, const VertexField&) = default;
};

template <class T>
struct CellField {
  GridDims dims;
  std::vector<T> data;

  CellField() = default;
  explicit CellField(const GridDims& d, T fill = T{}) : dims(d), data(d.cell_count(), fill) {}

  T& at(int i, int j, int l) { return data[dims.cell_index(i, j, l)]; }
  const T& at(int i, int j, int l) const { return data[dims.cell_index(i, j, l)]; }

  friend bool operator==(const CellField&, const CellField&) = default;
};

/// One value per lattice edge, split into the x-, y- and z-edge sub-arrays.
/// The edge (axis, i, j, l) joins vertex (i, j, l) to its +axis neighbour.
template <class T>
struct EdgeField {
  GridDims dims;
  std::array<std::vector<T>, 3> axes;

  EdgeField() = default;
  explicit EdgeField(const GridDims& d, T fill = T{}) : dims(d) {
    for (int a = 0; a < 3; ++a) axes[a].assign(d.edge_count(a), fill);
  }

  T& at(int axis, int i, int j, int l) { return axes[axis][dims.edge_index(axis, i, j, l)]; }
  const T& at(int axis, int i, int j, int l) const {
    return axes[axis][dims.edge_index(axis, i, j, l)];
  }

  friend bool operator==(const EdgeField&, const EdgeField&) = default;
};

enum class FieldKind : std::uint8_t { SDF, UDF, OCC };

/// Sampled field. SDF/UDF values live on lattice vertices. OCC grids are
/// binary voxel grids: one value per voxel, where voxel (i,j,l) is cell
/// (i,j,l) of the lattice returned by lattice_dims().
struct ScalarGrid {
  GridDims dims;
  FieldKind kind = FieldKind::SDF;
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(const GridDims& d, FieldKind kd, double fill = 0.0)
      : dims(d), kind(kd), values(d.vertex_count(), fill) {}

  double& at(int i, int j, int l) { return values[dims.vertex_index(i, j, l)]; }
  double at(int i, int j, int l) const { return values[dims.vertex_index(i, j, l)]; }

  /// Lattice the meshers operate on for this input.
  GridDims lattice_dims() const {
    return kind == FieldKind::OCC ? GridDims{dims.m + 1, dims.n + 1, dims.k + 1} : dims;
  }

  /// Checks the per-kind value invariants (finite, UDF >= 0, OCC in {0,1}).
  void validate() const;

  friend bool operator==(const ScalarGrid&, const ScalarGrid&) = default;
};

/// true = inside.
using SignGrid = VertexField<std::uint8_t>;
/// Per-cell vertex position relative to the cell's min corner, in [0,1]^3.
using VertexOffsetGrid = CellField<Vec3>;
using FlagField = EdgeField<std::uint8_t>;

/// Narrow-band supervision masks. Two cell masks are kept because the NDC and
/// UNDC vertex losses use different band definitions.
struct MaskGrids {
  VertexField<std::uint8_t> signs;
  CellField<std::uint8_t> cells_ndc;
  CellField<std::uint8_t> cells_undc;
  EdgeField<std::uint8_t> edges;

  MaskGrids() = default;
  explicit MaskGrids(const GridDims& d) : signs(d, 0), cells_ndc(d, 0), cells_undc(d, 0), edges(d, 0) {}

  friend bool operator==(const MaskGrids&, const MaskGrids&) = default;
};

// --- lattice helpers -------------------------------------------------------

inline Index3 axis_step(int axis) {
  Index3 s{0, 0, 0};
  s[axis] = 1;
  return s;
}

/// An edge is interior when all four cells around it exist, i.e. it can carry
/// a dual quad.
bool is_interior_edge(const GridDims& dims, int axis, int i, int j, int l);

/// The four cells sharing an edge, ordered counter-clockwise when viewed from
/// the +axis direction. Only meaningful for interior edges.
std::array<Index3, 4> cells_around_edge(int axis, int i, int j, int l);

/// Lattice-vertex offsets of the 8 cell corners; bit 0 = x, bit 1 = y, bit 2 = z.
inline Index3 corner_offset(int corner) { return {corner & 1, (corner >> 1) & 1, (corner >> 2) & 1}; }

struct CellEdge {
  int axis;
  Index3 vertex;  // offset of the edge's lower endpoint from the cell min corner
};
/// The 12 edges of a cell: 4 along x, 4 along y, 4 along z.
const std::array<CellEdge, 12>& cell_edges();

// --- field operations ------------------------------------------------------

/// sign = (value < iso); a value exactly at iso counts as outside.
SignGrid signs_from_scalar(const ScalarGrid& grid, double iso = 0.0);

/// Zero crossing t in (0,1) along each edge whose endpoints have different
/// signs; t is measured from the lower endpoint.
EdgeField<std::optional<double>> edge_crossings_linear(const ScalarGrid& grid);

/// xor of endpoint signs on every edge.
FlagField xor_flags(const SignGrid& signs);

struct GradientField {
  VertexField<Vec3> gradients;
  /// Vertices whose difference stencil had zero length; they were given +x.
  std::size_t degenerate = 0;
};

/// Central differences inside, one-sided differences on the border.
GradientField central_gradients(const ScalarGrid& grid);

/// Crossing normals by linear interpolation of vertex gradients at t,
/// normalized. Edges without a crossing hold the zero vector.
EdgeField<Vec3> interpolate_edge_normals(const EdgeField<std::optional<double>>& crossings,
                                         const VertexField<Vec3>& gradients);

/// Cells within Manhattan distance `radius` (in cell steps) of the cell
/// containing some point; points outside the lattice count for the nearest
/// border cell.
CellField<std::uint8_t> cells_near_points(const GridDims& lattice, const std::vector<Vec3>& points,
                                          int radius);

}  // namespace ndc
