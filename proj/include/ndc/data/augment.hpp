#pragma once

#include <array>

#include "ndc/data/sample.hpp"

namespace ndc::data {

/// Signed axis permutation of the lattice plus optional sign inversion.
/// Output axis b reads source axis perm[b], reversed when flip[b].
struct LatticeTransform {
  std::array<int, 3> perm{0, 1, 2};
  std::array<bool, 3> flip{false, false, false};
  bool invert = false;

  friend bool operator==(const LatticeTransform&, const LatticeTransform&) = default;
};

inline constexpr int kRotationCount = 24;
inline constexpr int kTransformCount = 96;

/// id = (rotation * 2 + mirror) * 2 + invert. Rotations are the 24 signed
/// permutations with determinant +1 in a fixed order (rotation 0 is the
/// identity); a mirrored transform applies an x reflection before the
/// rotation. InvalidTransform outside [0, 96).
LatticeTransform transform_from_id(int id);
int transform_id(const LatticeTransform& t);
int inverse_transform_id(int id);
/// a then b.
int compose_transform_ids(int a, int b);

GridDims transform_dims(const LatticeTransform& t, const GridDims& dims);

/// Geometric maps on lattice `dims` (the source lattice).
Index3 transform_vertex(const LatticeTransform& t, const GridDims& dims, const Index3& v);
Vec3 transform_point(const LatticeTransform& t, const GridDims& dims, const Vec3& p);

template <class T>
VertexField<T> transform_vertex_field(const LatticeTransform& t, const VertexField<T>& f);
template <class T>
CellField<T> transform_cell_field(const LatticeTransform& t, const CellField<T>& f);
template <class T>
EdgeField<T> transform_edge_field(const LatticeTransform& t, const EdgeField<T>& f);
VertexOffsetGrid transform_offsets(const LatticeTransform& t, const VertexOffsetGrid& f);

/// Applies the transform to the input and every GT field and mask.
/// Inversion negates SDF, keeps UDF, complements occupancy and (watertight)
/// signs, and leaves flags, offsets, masks and point features unchanged.
TrainingSample augment_sample(const TrainingSample& sample, int transform_id);

}  // namespace ndc::data
