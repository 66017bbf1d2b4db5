#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ndc/grid.hpp"
#include "ndc/mesh.hpp"
#include "ndc/pointcloud.hpp"

namespace ndc::io {

// ---- NDCGRID -------------------------------------------------------------
//
// "NDCG", version byte 0x01, u32 m, n, k (lattice vertex counts), u8 payload
// code, then the payload in x-fastest order, little-endian.

enum class GridPayload : std::uint8_t {
  VertexScalar = 0,  // f32 per vertex
  VertexSign = 1,    // u8 per vertex
  CellVector = 2,    // f32 x 3 per cell
  EdgeByte = 3,      // u8 per edge, x-, y-, z-edge blocks
  EdgeScalar = 4,    // f32 per edge, x-, y-, z-edge blocks
};

/// Raw decoded file: exactly one of `reals` / `bytes` is filled.
struct GridFile {
  GridDims dims;
  GridPayload payload = GridPayload::VertexScalar;
  std::vector<float> reals;
  std::vector<std::uint8_t> bytes;
};

std::size_t payload_count(const GridDims& dims, GridPayload payload);

void write_grid_file(std::ostream& out, const GridFile& file);
/// Errors: BadMagic, VersionMismatch, ShapeMismatch (unknown payload code or
/// invalid dims), TruncatedPayload.
GridFile read_grid_file(std::istream& in);
void save_grid_file(const std::filesystem::path& path, const GridFile& file);
GridFile load_grid_file(const std::filesystem::path& path);

/// Typed helpers. `expect` (when given) must match the payload code, else
/// ShapeMismatch. Values are stored as f32.
void save_scalar_grid(const std::filesystem::path& path, const ScalarGrid& grid);
ScalarGrid load_scalar_grid(const std::filesystem::path& path, FieldKind kind);
void save_signs(const std::filesystem::path& path, const SignGrid& signs);
SignGrid load_signs(const std::filesystem::path& path);
void save_offsets(const std::filesystem::path& path, const VertexOffsetGrid& offsets);
VertexOffsetGrid load_offsets(const std::filesystem::path& path);
void save_flags(const std::filesystem::path& path, const EdgeField<std::uint8_t>& flags);
EdgeField<std::uint8_t> load_flags(const std::filesystem::path& path);
void save_cell_bytes(const std::filesystem::path& path, const CellField<std::uint8_t>& cells);
CellField<std::uint8_t> load_cell_bytes(const std::filesystem::path& path);

// ---- OBJ / PLY ------------------------------------------------------------

/// Polygon soup with faces of any arity >= 3.
struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
  friend bool operator==(const PolyMesh&, const PolyMesh&) = default;
};

PolyMesh to_poly(const QuadMesh& mesh);
PolyMesh to_poly(const TriMesh& mesh);
/// Fan triangulation from each face's first vertex.
TriMesh triangulate(const PolyMesh& mesh);

struct ObjReadReport {
  std::size_t skipped_records = 0;  // unsupported record types (vn, vt, l, ...)
};

/// ASCII OBJ with v and f records; f accepts v, v/vt, v//vn, v/vt/vn and
/// negative indices. Malformed lines raise ParseError naming the line.
PolyMesh read_obj(std::istream& in, ObjReadReport* report = nullptr);
PolyMesh load_obj(const std::filesystem::path& path, ObjReadReport* report = nullptr);

/// Vertex coordinates use the shortest decimal that round-trips.
void write_obj(std::ostream& out, const PolyMesh& mesh);
void save_obj(const std::filesystem::path& path, const PolyMesh& mesh);

/// Binary little-endian PLY with double x, y, z and int face lists.
void write_ply(std::ostream& out, const PolyMesh& mesh);
void save_ply(const std::filesystem::path& path, const PolyMesh& mesh);
/// Accepts float or double coordinates, ignores other vertex properties and
/// reads face lists with any integer count/index types.
PolyMesh read_ply(std::istream& in);
PolyMesh load_ply(const std::filesystem::path& path);

void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud load_point_cloud(const std::filesystem::path& path);

}  // namespace ndc::io
