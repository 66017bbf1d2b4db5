#pragma once

#include <functional>
#include <span>
#include <variant>

#include "ndc/grid.hpp"
#include "ndc/mesh.hpp"

namespace ndc {

/// Tangent plane through `point` with unit `normal`.
struct PlaneConstraint {
  Vec3 point;
  Vec3 normal;
};

struct CellBounds {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  static CellBounds unit_cell(const Index3& cell) {
    const Vec3 lo(cell[0], cell[1], cell[2]);
    return {lo, lo + Vec3::Ones()};
  }
};

struct QefSolution {
  Vec3 position;
  Vec3 mass_point;
  int rank = 0;           // singular values kept by the truncation
  bool fallback = false;  // non-finite input or solve; position is the mass point
};

/// Relative singular-value cut-off of the QEF pseudo-inverse.
inline constexpr double kQefTruncation = 0.1;

/// Minimizes sum_e (n_e . (x - p_e))^2 with a truncated-SVD pseudo-inverse
/// anchored at the mass point of the constraint points, then clamps into
/// `bounds`. Directions the constraints leave free resolve to the mass point.
/// If clamping makes the objective worse than at the mass point, the mass
/// point is returned.
QefSolution qef_solve_detailed(std::span<const PlaneConstraint> constraints,
                               const CellBounds& bounds, double truncation = kQefTruncation);

Vec3 qef_solve(std::span<const PlaneConstraint> constraints, const CellBounds& bounds);

double qef_objective(std::span<const PlaneConstraint> constraints, const Vec3& x);

/// Analytic field used for classical DC with exact normals. Crossings are
/// refined on `sdf` by bisection; if `gradient` is empty it is estimated by
/// central differences of `sdf`.
struct ExactField {
  std::function<double(const Vec3&)> sdf;
  std::function<Vec3(const Vec3&)> gradient;
};

/// DC-est: crossings and normals interpolated from the sampled grid alone.
struct EstimatedNormals {};

using NormalSource = std::variant<ExactField, EstimatedNormals>;

/// Hermite data on the lattice edges: which edges cross, where (t from the
/// lower endpoint) and the surface normal there.
struct EdgeHermite {
  FlagField flags;
  EdgeField<double> t;
  EdgeField<Vec3> normals;
};

EdgeHermite hermite_from_grid(const ScalarGrid& grid, const NormalSource& source);

struct CellVertices {
  VertexOffsetGrid offsets;
  CellField<std::uint8_t> active;  // cells with at least one flagged edge
  std::size_t fallbacks = 0;
};

/// One QEF per cell over the constraints of its flagged edges. Inactive cells
/// keep the centre offset (0.5, 0.5, 0.5).
CellVertices qef_cell_vertices(const EdgeHermite& hermite);

/// Dual quad for every flagged interior edge, joining the vertices
/// (cell origin + offset) of its four cells.
///
/// With `signs`, a quad is wound counter-clockwise seen from +axis when the
/// lower endpoint is inside and reversed otherwise, so normals point from
/// inside to outside. Without signs every quad uses the +axis winding.
///
/// Every cell with at least one flagged edge among its 12 gets a vertex.
/// Vertices are numbered in cell storage order and quads follow edge storage
/// order (x-, y-, then z-edges).
QuadMesh build_dual_mesh(const FlagField& faces, const SignGrid* signs,
                         const VertexOffsetGrid& offsets);

/// Classical dual contouring.
QuadMesh dc_extract(const ScalarGrid& grid, const NormalSource& source);

/// Standard 256-case marching cubes. Vertices sit at the linear edge
/// crossings and are shared between neighbouring cells.
TriMesh mc_extract(const ScalarGrid& grid);

}  // namespace ndc
