#pragma once

#include "ndc/grid.hpp"
#include "ndc/isosurf.hpp"
#include "ndc/mesh.hpp"

namespace ndc::data {

/// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Every undirected edge is shared by exactly two triangles.
bool is_watertight(const TriMesh& mesh);

/// Inside test by ray parity, majority vote over three fixed skew rays.
bool inside_mesh(const TriMesh& mesh, const Vec3& p);

/// Exact unsigned distance to the triangles at every lattice vertex; SDF
/// additionally takes the sign from inside_mesh. SDF on a mesh that is not
/// watertight raises OpenMeshError.
ScalarGrid mesh_to_sdf_grid(const TriMesh& mesh, const GridDims& dims, FieldKind kind = FieldKind::SDF);

/// Lattice-edge / triangle intersections. Watertight meshes: flags are the
/// xor of `signs` and the hit nearest to each edge's inside endpoint wins.
/// Otherwise (signs ignored) every hit edge is flagged and the hit nearest
/// to the lower endpoint wins. Normals are unit face normals.
EdgeHermite mesh_edge_data(const TriMesh& mesh, const GridDims& dims, const SignGrid* signs);

// Test shapes, all outward-wound.
TriMesh make_icosphere(const Vec3& center, double radius, int subdivisions);
TriMesh make_box_mesh(const Vec3& center, const Vec3& half);
/// Planar rectangle corner + s*u + t*v, s, t in [0,1], split into nu x nv
/// quads of two triangles each; normal is u x v.
TriMesh make_sheet(const Vec3& corner, const Vec3& u, const Vec3& v, int nu = 1, int nv = 1);

}  // namespace ndc::data
