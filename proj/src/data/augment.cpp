#include "ndc/data/augment.hpp"

#include <algorithm>

namespace ndc::data {

namespace {

int perm_parity(const std::array<int, 3>& p) {
  int inversions = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (p[a] > p[b]) ++inversions;
  return inversions & 1;
}

const std::array<LatticeTransform, kRotationCount>& rotations() {
  static const auto table = [] {
    std::array<LatticeTransform, kRotationCount> out{};
    std::array<int, 3> p{0, 1, 2};
    int n = 0;
    do {
      for (int bits = 0; bits < 8; ++bits) {
        const int flips = (bits & 1) + ((bits >> 1) & 1) + ((bits >> 2) & 1);
        if (((perm_parity(p) + flips) & 1) != 0) continue;  // determinant -1
        LatticeTransform t;
        t.perm = p;
        for (int b = 0; b < 3; ++b) t.flip[b] = (bits >> b) & 1;
        out[n++] = t;
      }
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
  }();
  return table;
}

}  // namespace

LatticeTransform transform_from_id(int id) {
  if (id < 0 || id >= kTransformCount)
    throw Error(ErrorCode::InvalidTransform, "transform id " + std::to_string(id) + " outside [0, 96)");
  LatticeTransform t = rotations()[id / 4];
  if ((id / 2) % 2) {
    // R * diag(-1, 1, 1): the output axis reading source x is reversed.
    for (int b = 0; b < 3; ++b)
      if (t.perm[b] == 0) t.flip[b] = !t.flip[b];
  }
  t.invert = id % 2;
  return t;
}

int transform_id(const LatticeTransform& t) {
  for (int id = 0; id < kTransformCount; ++id)
    if (transform_from_id(id) == t) return id;
  throw Error(ErrorCode::InvalidTransform, "not a lattice transform");
}

int compose_transform_ids(int a, int b) {
  const LatticeTransform ta = transform_from_id(a), tb = transform_from_id(b);
  // out[c] = first[ta.perm[tb.perm[c]]] with flips accumulated.
  LatticeTransform c;
  for (int o = 0; o < 3; ++o) {
    c.perm[o] = ta.perm[tb.perm[o]];
    c.flip[o] = tb.flip[o] != ta.flip[tb.perm[o]];
  }
  c.invert = ta.invert != tb.invert;
  return transform_id(c);
}

int inverse_transform_id(int id) {
  for (int j = 0; j < kTransformCount; ++j)
    if (compose_transform_ids(id, j) == 0) return j;
  throw Error(ErrorCode::InvalidTransform, "transform has no inverse");
}

GridDims transform_dims(const LatticeTransform& t, const GridDims& d) {
  return {d.count(t.perm[0]), d.count(t.perm[1]), d.count(t.perm[2])};
}

Index3 transform_vertex(const LatticeTransform& t, const GridDims& dims, const Index3& v) {
  Index3 out;
  for (int b = 0; b < 3; ++b) {
    const int src = t.perm[b];
    out[b] = t.flip[b] ? dims.count(src) - 1 - v[src] : v[src];
  }
  return out;
}

Vec3 transform_point(const LatticeTransform& t, const GridDims& dims, const Vec3& p) {
  Vec3 out;
  for (int b = 0; b < 3; ++b) {
    const int src = t.perm[b];
    out[b] = t.flip[b] ? double(dims.count(src) - 1) - p[src] : p[src];
  }
  return out;
}

template <class T>
VertexField<T> transform_vertex_field(const LatticeTransform& t, const VertexField<T>& f) {
  VertexField<T> out(transform_dims(t, f.dims));
  for_each_index(f.dims.vertex_shape(), [&](int i, int j, int l) {
    const Index3 v = transform_vertex(t, f.dims, {i, j, l});
    out.at(v[0], v[1], v[2]) = f.at(i, j, l);
  });
  return out;
}

namespace {

// Image of cell c: its min corner maps to the min corner of the image cell.
Index3 transform_cell(const LatticeTransform& t, const GridDims& dims, const Index3& c) {
  Index3 out;
  for (int b = 0; b < 3; ++b) {
    const int src = t.perm[b];
    out[b] = t.flip[b] ? dims.count(src) - 2 - c[src] : c[src];
  }
  return out;
}

}  // namespace

template <class T>
CellField<T> transform_cell_field(const LatticeTransform& t, const CellField<T>& f) {
  CellField<T> out(transform_dims(t, f.dims));
  for_each_index(f.dims.cell_shape(), [&](int i, int j, int l) {
    const Index3 c = transform_cell(t, f.dims, {i, j, l});
    out.at(c[0], c[1], c[2]) = f.at(i, j, l);
  });
  return out;
}

template <class T>
EdgeField<T> transform_edge_field(const LatticeTransform& t, const EdgeField<T>& f) {
  EdgeField<T> out(transform_dims(t, f.dims));
  for (int a = 0; a < 3; ++a) {
    const int b = int(std::find(t.perm.begin(), t.perm.end(), a) - t.perm.begin());
    for_each_index(f.dims.edge_shape(a), [&](int i, int j, int l) {
      Index3 v = transform_vertex(t, f.dims, {i, j, l});
      if (t.flip[b]) v[b] -= 1;  // the upper endpoint became the lower one
      out.at(b, v[0], v[1], v[2]) = f.at(a, i, j, l);
    });
  }
  return out;
}

VertexOffsetGrid transform_offsets(const LatticeTransform& t, const VertexOffsetGrid& f) {
  VertexOffsetGrid out = transform_cell_field(t, f);
  for (Vec3& o : out.data) {
    const Vec3 src = o;
    for (int b = 0; b < 3; ++b) o[b] = t.flip[b] ? 1.0 - src[t.perm[b]] : src[t.perm[b]];
  }
  return out;
}

template VertexField<std::uint8_t> transform_vertex_field(const LatticeTransform&, const VertexField<std::uint8_t>&);
template VertexField<double> transform_vertex_field(const LatticeTransform&, const VertexField<double>&);
template CellField<std::uint8_t> transform_cell_field(const LatticeTransform&, const CellField<std::uint8_t>&);
template CellField<Vec3> transform_cell_field(const LatticeTransform&, const CellField<Vec3>&);
template EdgeField<std::uint8_t> transform_edge_field(const LatticeTransform&, const EdgeField<std::uint8_t>&);

namespace {

ScalarGrid transform_grid(const LatticeTransform& t, const ScalarGrid& g) {
  if (g.values.empty()) return g;
  VertexField<double> f;
  f.dims = g.dims;
  f.data = g.values;
  const VertexField<double> moved = transform_vertex_field(t, f);
  ScalarGrid out(moved.dims, g.kind);
  out.values = moved.data;
  return out;
}

}  // namespace

TrainingSample augment_sample(const TrainingSample& s, int id) {
  const LatticeTransform t = transform_from_id(id);
  TrainingSample out;
  out.kind = s.kind;
  out.lattice = transform_dims(t, s.lattice);
  out.watertight = s.watertight;
  // Voxel grids are per-cell values stored on a vertex-shaped grid, so the
  // vertex map over voxel dims is the cell map of the lattice.
  out.grid = transform_grid(t, s.grid);
  out.cloud = s.cloud;
  for (Vec3& p : out.cloud.points) p = transform_point(t, s.lattice, p);
  out.gt_signs = transform_vertex_field(t, s.gt_signs);
  out.gt_flags = transform_edge_field(t, s.gt_flags);
  out.gt_offsets = transform_offsets(t, s.gt_offsets);
  out.masks.signs = transform_vertex_field(t, s.masks.signs);
  out.masks.cells_ndc = transform_cell_field(t, s.masks.cells_ndc);
  out.masks.cells_undc = transform_cell_field(t, s.masks.cells_undc);
  out.masks.edges = transform_edge_field(t, s.masks.edges);
  if (t.invert) {
    if (out.watertight)
      for (auto& v : out.gt_signs.data) v = !v;
    if (out.grid.kind == FieldKind::SDF)
      for (double& v : out.grid.values) v = -v;
    else if (out.grid.kind == FieldKind::OCC)
      for (double& v : out.grid.values) v = 1.0 - v;
  }
  return out;
}

}  // namespace ndc::data
