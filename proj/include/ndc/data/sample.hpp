#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "ndc/data/csg.hpp"
#include "ndc/grid.hpp"
#include "ndc/isosurf.hpp"
#include "ndc/mesh.hpp"
#include "ndc/pointcloud.hpp"

namespace ndc::data {

using Shape = std::variant<CsgNode, TriMesh>;

enum class SampleKind : std::uint8_t { SDF, UDF, OCC, POINTS };

std::string to_string(SampleKind kind);
SampleKind sample_kind_from_string(const std::string& name);  // InvalidKind on failure

/// One supervised example. All GT fields and masks live on `lattice`.
/// `grid` holds the input for SDF / UDF (on the lattice) and OCC (one value
/// per voxel, dims = lattice - 1); `cloud` holds it for POINTS.
struct TrainingSample {
  SampleKind kind = SampleKind::SDF;
  GridDims lattice;
  ScalarGrid grid;
  PointCloud cloud;
  bool watertight = true;
  SignGrid gt_signs;
  FlagField gt_flags;
  VertexOffsetGrid gt_offsets;
  MaskGrids masks;

  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

/// Exact multiple of 2^-24 nearest to x. Offsets and point coordinates are
/// stored on this grid so that reflections (x -> n - x) are exact and
/// survive f32 files.
double quantize_dyadic(double x);

inline constexpr int kBisectionIterations = 30;

struct GtEdgeData {
  EdgeHermite hermite;
  SignGrid signs;  // all outside when the source is not watertight
  bool watertight = true;
};

/// Ground-truth signs and edge crossings of `shape` on `dims`.
/// CSG: signs of the sampled field, flags = xor(signs), bisection on each
/// flagged edge, normal from csg_gradient at the root.
/// Meshes: see mesh_edge_data; signs from the sampled SDF when watertight.
/// `signs` (when given) overrides the sampled signs of watertight sources.
GtEdgeData gt_edge_data(const Shape& shape, const GridDims& dims, const SignGrid* signs = nullptr);

/// qef_cell_vertices with offsets quantized by quantize_dyadic.
CellVertices pseudo_gt_vertices(const EdgeHermite& hermite);

/// Distance grid of a shape on the lattice vertices (values rounded to f32).
ScalarGrid shape_distance_grid(const Shape& shape, const GridDims& dims, FieldKind kind);

/// Whether `p` is inside the shape; meshes must be watertight.
bool shape_contains(const Shape& shape, const Vec3& p);

/// Supervision masks, one rule set per sample kind:
///   cells_ndc   cells whose corner signs differ
///   cells_undc  cells with a flagged edge
///   signs       SDF / UDF / POINTS: corners of cells_ndc cells.
///               OCC: all 8 corners of every occupied voxel that has an
///               unoccupied voxel (or the outside) among its 26 neighbours.
///   edges       SDF / UDF: both endpoint values |v| < 1.
///               OCC: interior edges whose 4 surrounding voxels are occupied.
///               POINTS: edges owned by cells near the cloud (the edge along
///               each axis from an active cell's min corner).
MaskGrids build_masks(const TrainingSample& sample);

/// Seeded surface sampling plus isotropic Gaussian noise of `sigma` cells,
/// coordinates quantized. Meshes are sampled by area; CSG points are drawn
/// in `region`'s box, kept within 1 unit of the surface and projected onto
/// it by Newton steps.
PointCloud sample_point_cloud(const Shape& shape, const GridDims& region, std::size_t n, double sigma,
                              std::uint64_t seed);

struct SampleOptions {
  std::size_t points = 4096;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Builds a complete sample. OCC inputs mark a voxel occupied when its
/// centre is inside. SDF / OCC need a watertight source (OpenMeshError).
TrainingSample make_sample(const Shape& shape, SampleKind kind, const GridDims& lattice,
                           const SampleOptions& options = {});

/// Checks the structural invariants: consistent dims, gt_flags = xor(gt_signs)
/// for watertight samples, offsets in [0,1]^3 on masked cells. ShapeError.
void validate_sample(const TrainingSample& sample);

}  // namespace ndc::data
