#include "ndc/mesher.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

#include "ndc/isosurf.hpp"

namespace ndc {

QuadMesh ndc_extract(const SignGrid& signs, const VertexOffsetGrid& offsets) {
  return build_dual_mesh(xor_flags(signs), &signs, offsets);
}

QuadMesh undc_extract(const FlagField& flags, const VertexOffsetGrid& offsets) {
  return build_dual_mesh(flags, nullptr, offsets);
}

QuadMesh extract(const PredictionFields& fields) {
  if (fields.flags) return undc_extract(*fields.flags, fields.offsets);
  if (fields.signs) return ndc_extract(*fields.signs, fields.offsets);
  throw Error(ErrorCode::ShapeError, "prediction fields hold neither signs nor flags");
}

QuadMesh orient_by_signs(const QuadMesh& mesh, const FlagField& flags, const SignGrid& signs) {
  const GridDims& d = flags.dims;
  if (signs.dims != d) throw Error(ErrorCode::ShapeError, "signs and flags differ in dims");
  QuadMesh out = mesh;
  std::size_t q = 0;
  for (int a = 0; a < 3; ++a) {
    for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
      if (!flags.at(a, i, j, l) || !is_interior_edge(d, a, i, j, l)) return;
      if (q >= out.quads.size()) throw Error(ErrorCode::ShapeError, "mesh has too few quads");
      if (!signs.at(i, j, l)) std::swap(out.quads[q][1], out.quads[q][3]);
      ++q;
    });
  }
  if (q != out.quads.size()) throw Error(ErrorCode::ShapeError, "mesh has extra quads");
  return out;
}

namespace {

// Number of dual quads meeting at the mesh edge dual to the lattice face
// spanned by axes (u, w) with min corner v.
int face_incidence(const FlagField& flags, int u, int w, const Index3& v) {
  const GridDims& d = flags.dims;
  int count = 0;
  auto add = [&](int axis, Index3 p) {
    if (is_interior_edge(d, axis, p[0], p[1], p[2]) && flags.at(axis, p[0], p[1], p[2])) ++count;
  };
  Index3 pw = v, pu = v;
  pw[w] += 1;
  pu[u] += 1;
  add(u, v);
  add(u, pw);
  add(w, v);
  add(w, pu);
  return count;
}

int boundary_sides(const FlagField& flags, int a, const Index3& v) {
  int boundary = 0;
  for (int s = 1; s <= 2; ++s) {
    const int b = (a + s) % 3;
    Index3 below = v;
    below[b] -= 1;
    if (face_incidence(flags, a, b, v) == 1) ++boundary;
    if (face_incidence(flags, a, b, below) == 1) ++boundary;
  }
  return boundary;
}

}  // namespace

FlagField close_holes(const FlagField& flags, int max_passes, int* passes_run) {
  const GridDims& d = flags.dims;
  FlagField current = flags;
  int passes = 0;
  while (passes < max_passes) {
    const FlagField snapshot = current;
    bool changed = false;
    for (int a = 0; a < 3; ++a) {
      for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
        if (snapshot.at(a, i, j, l) || !is_interior_edge(d, a, i, j, l)) return;
        if (boundary_sides(snapshot, a, {i, j, l}) >= 3) {
          current.at(a, i, j, l) = 1;
          changed = true;
        }
      });
    }
    ++passes;
    if (!changed) break;
  }
  if (passes_run) *passes_run = passes;
  return current;
}

TriMesh split_quads(const QuadMesh& mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TriMesh out{mesh.vertices, {}};
  out.triangles.reserve(mesh.quads.size() * 2);
  for (const auto& q : mesh.quads) {
    if ((rng() >> 63) == 0) {
      out.triangles.push_back({q[0], q[1], q[2]});
      out.triangles.push_back({q[0], q[2], q[3]});
    } else {
      out.triangles.push_back({q[1], q[2], q[3]});
      out.triangles.push_back({q[1], q[3], q[0]});
    }
  }
  return out;
}

namespace {

template <std::size_t N>
EdgeTopologyStats count_edges(const std::vector<std::array<int, N>>& faces) {
  std::unordered_map<std::uint64_t, int> incidence;
  incidence.reserve(faces.size() * N);
  for (const auto& f : faces) {
    for (std::size_t e = 0; e < N; ++e) {
      const auto a = static_cast<std::uint32_t>(f[e]);
      const auto b = static_cast<std::uint32_t>(f[(e + 1) % N]);
      if (a == b) continue;
      const std::uint64_t key = (std::uint64_t(std::min(a, b)) << 32) | std::max(a, b);
      ++incidence[key];
    }
  }
  EdgeTopologyStats s;
  s.total = incidence.size();
  for (const auto& [key, count] : incidence) {
    switch (count) {
      case 1: ++s.boundary; break;
      case 2: ++s.manifold; break;
      case 3: ++s.non_manifold_3; break;
      case 4: ++s.non_manifold_4; break;
      default: ++s.non_manifold_more; break;
    }
  }
  return s;
}

}  // namespace

EdgeTopologyStats edge_topology_stats(const QuadMesh& mesh) { return count_edges(mesh.quads); }
EdgeTopologyStats edge_topology_stats(const TriMesh& mesh) { return count_edges(mesh.triangles); }

}  // namespace ndc
