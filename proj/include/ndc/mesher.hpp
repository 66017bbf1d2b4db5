#pragma once

#include <cstdint>
#include <optional>

#include "ndc/grid.hpp"
#include "ndc/mesh.hpp"

namespace ndc {

/// Network (or ground-truth) outputs consumed by the NDC/UNDC meshers.
struct PredictionFields {
  std::optional<SignGrid> signs;
  std::optional<FlagField> flags;
  VertexOffsetGrid offsets;
};

/// Faces from sign changes, vertices from per-cell offsets. Winding matches
/// classical DC (outward normals).
QuadMesh ndc_extract(const SignGrid& signs, const VertexOffsetGrid& offsets);

/// Faces from predicted edge flags directly. No sign information exists, so
/// each quad gets the +axis winding and the result may be open or
/// non-orientable.
QuadMesh undc_extract(const FlagField& flags, const VertexOffsetGrid& offsets);

/// Extracts from whichever of signs / flags is present (flags win).
QuadMesh extract(const PredictionFields& fields);

/// Reverses the quads whose dual edge has its upper endpoint inside. Applied
/// to undc_extract(xor_flags(S), V) this reproduces ndc_extract(S, V).
/// `mesh` must come from one of the extractors on the same grid.
QuadMesh orient_by_signs(const QuadMesh& mesh, const FlagField& flags, const SignGrid& signs);

inline constexpr int kMaxHoleClosingPasses = 3;

/// Adds the dual quad of an unflagged interior edge when at least three of its
/// four mesh edges are currently boundary edges. Each pass decides against a
/// snapshot of the previous pass; iteration stops at a fixpoint or after
/// `max_passes`. Only interior edges are ever changed.
FlagField close_holes(const FlagField& flags, int max_passes = kMaxHoleClosingPasses,
                      int* passes_run = nullptr);

/// Each quad becomes two triangles along one of its diagonals, chosen by a
/// seeded generator.
TriMesh split_quads(const QuadMesh& mesh, std::uint64_t seed);

/// Undirected-edge incidence histogram.
struct EdgeTopologyStats {
  std::size_t total = 0;
  std::size_t boundary = 0;         // 1 face
  std::size_t manifold = 0;         // 2 faces
  std::size_t non_manifold_3 = 0;   // 3 faces
  std::size_t non_manifold_4 = 0;   // 4 faces
  std::size_t non_manifold_more = 0;

  double fraction(std::size_t count) const { return total ? double(count) / double(total) : 0.0; }
  friend bool operator==(const EdgeTopologyStats&, const EdgeTopologyStats&) = default;
};

EdgeTopologyStats edge_topology_stats(const QuadMesh& mesh);
EdgeTopologyStats edge_topology_stats(const TriMesh& mesh);

}  // namespace ndc
