#include <algorithm>
#include <fstream>

#include "ndc/binio.hpp"
#include "ndc/io.hpp"

namespace ndc::io {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'C', 'G'};
constexpr std::uint8_t kVersion = 1;

bool real_payload(GridPayload p) {
  return p == GridPayload::VertexScalar || p == GridPayload::CellVector || p == GridPayload::EdgeScalar;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

GridFile expect(GridFile f, GridPayload payload, const std::filesystem::path& path) {
  if (f.payload != payload)
    throw Error(ErrorCode::ShapeMismatch, path.string() + ": payload code " + std::to_string(int(f.payload)) +
                                              ", expected " + std::to_string(int(payload)));
  return f;
}

}  // namespace

std::size_t payload_count(const GridDims& d, GridPayload payload) {
  switch (payload) {
    case GridPayload::VertexScalar:
    case GridPayload::VertexSign: return d.vertex_count();
    case GridPayload::CellVector: return 3 * d.cell_count();
    case GridPayload::EdgeByte:
    case GridPayload::EdgeScalar: return d.total_edge_count();
  }
  return 0;
}

void write_grid_file(std::ostream& out, const GridFile& f) {
  f.dims.validate();
  const std::size_t n = payload_count(f.dims, f.payload);
  if ((real_payload(f.payload) ? f.reals.size() : f.bytes.size()) != n)
    throw Error(ErrorCode::ShapeError, "grid payload size does not match dims");
  out.write(kMagic, 4);
  binio::put_u8(out, kVersion);
  binio::put_u32(out, std::uint32_t(f.dims.m));
  binio::put_u32(out, std::uint32_t(f.dims.n));
  binio::put_u32(out, std::uint32_t(f.dims.k));
  binio::put_u8(out, std::uint8_t(f.payload));
  if (real_payload(f.payload)) {
    for (float v : f.reals) binio::put_f32(out, v);
  } else {
    out.write(reinterpret_cast<const char*>(f.bytes.data()), std::streamsize(f.bytes.size()));
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing grid file");
}

GridFile read_grid_file(std::istream& in) {
  char magic[4];
  binio::read_exact(in, magic, 4, "grid header");
  if (!std::equal(magic, magic + 4, kMagic)) throw Error(ErrorCode::BadMagic, "not an NDCGRID file");
  const std::uint8_t version = binio::get_u8(in, "grid header");
  if (version != kVersion)
    throw Error(ErrorCode::VersionMismatch, "NDCGRID version " + std::to_string(version) + ", expected 1");
  GridFile f;
  const std::uint32_t m = binio::get_u32(in, "grid header");
  const std::uint32_t n = binio::get_u32(in, "grid header");
  const std::uint32_t k = binio::get_u32(in, "grid header");
  constexpr std::uint32_t kMaxAxis = 1u << 14;
  if (m < 2 || n < 2 || k < 2 || m > kMaxAxis || n > kMaxAxis || k > kMaxAxis)
    throw Error(ErrorCode::ShapeMismatch, "NDCGRID dims out of range");
  f.dims = GridDims{int(m), int(n), int(k)};
  const std::uint8_t code = binio::get_u8(in, "grid header");
  if (code > 4) throw Error(ErrorCode::ShapeMismatch, "unknown NDCGRID payload code " + std::to_string(code));
  f.payload = GridPayload(code);
  const std::size_t count = payload_count(f.dims, f.payload);
  if (real_payload(f.payload)) {
    f.reals.resize(count);
    for (float& v : f.reals) v = binio::get_f32(in, "grid payload");
  } else {
    f.bytes.resize(count);
    binio::read_exact(in, reinterpret_cast<char*>(f.bytes.data()), count, "grid payload");
  }
  return f;
}

void save_grid_file(const std::filesystem::path& path, const GridFile& file) {
  auto out = open_out(path);
  write_grid_file(out, file);
}

GridFile load_grid_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_grid_file(in);
}

void save_scalar_grid(const std::filesystem::path& path, const ScalarGrid& grid) {
  GridFile f{grid.dims, GridPayload::VertexScalar, {}, {}};
  f.reals.assign(grid.values.begin(), grid.values.end());
  save_grid_file(path, f);
}

ScalarGrid load_scalar_grid(const std::filesystem::path& path, FieldKind kind) {
  const GridFile f = expect(load_grid_file(path), GridPayload::VertexScalar, path);
  ScalarGrid g(f.dims, kind);
  g.values.assign(f.reals.begin(), f.reals.end());
  g.validate();
  return g;
}

void save_signs(const std::filesystem::path& path, const SignGrid& signs) {
  save_grid_file(path, GridFile{signs.dims, GridPayload::VertexSign, {}, signs.data});
}

SignGrid load_signs(const std::filesystem::path& path) {
  GridFile f = expect(load_grid_file(path), GridPayload::VertexSign, path);
  SignGrid s(f.dims, 0);
  for (std::size_t i = 0; i < f.bytes.size(); ++i) s.data[i] = f.bytes[i] != 0;
  return s;
}

void save_offsets(const std::filesystem::path& path, const VertexOffsetGrid& offsets) {
  GridFile f{offsets.dims, GridPayload::CellVector, {}, {}};
  f.reals.reserve(3 * offsets.data.size());
  for (const Vec3& o : offsets.data)
    for (int a = 0; a < 3; ++a) f.reals.push_back(float(o[a]));
  save_grid_file(path, f);
}

VertexOffsetGrid load_offsets(const std::filesystem::path& path) {
  const GridFile f = expect(load_grid_file(path), GridPayload::CellVector, path);
  VertexOffsetGrid o(f.dims);
  for (std::size_t c = 0; c < o.data.size(); ++c)
    o.data[c] = Vec3(f.reals[3 * c], f.reals[3 * c + 1], f.reals[3 * c + 2]).cwiseMax(0.0).cwiseMin(1.0);
  return o;
}

void save_flags(const std::filesystem::path& path, const EdgeField<std::uint8_t>& flags) {
  GridFile f{flags.dims, GridPayload::EdgeByte, {}, {}};
  for (const auto& axis : flags.axes) f.bytes.insert(f.bytes.end(), axis.begin(), axis.end());
  save_grid_file(path, f);
}

EdgeField<std::uint8_t> load_flags(const std::filesystem::path& path) {
  const GridFile f = expect(load_grid_file(path), GridPayload::EdgeByte, path);
  EdgeField<std::uint8_t> e(f.dims, 0);
  std::size_t i = 0;
  for (auto& axis : e.axes)
    for (auto& v : axis) v = f.bytes[i++] != 0;
  return e;
}

// Cell masks are stored as a u8 vertex payload whose dims are the cell
// counts; this needs >= 2 cells per axis.
void save_cell_bytes(const std::filesystem::path& path, const CellField<std::uint8_t>& cells) {
  const Index3 cs = cells.dims.cell_shape();
  save_grid_file(path, GridFile{GridDims{cs[0], cs[1], cs[2]}, GridPayload::VertexSign, {}, cells.data});
}

CellField<std::uint8_t> load_cell_bytes(const std::filesystem::path& path) {
  const GridFile f = expect(load_grid_file(path), GridPayload::VertexSign, path);
  CellField<std::uint8_t> c(GridDims{f.dims.m + 1, f.dims.n + 1, f.dims.k + 1}, 0);
  for (std::size_t i = 0; i < f.bytes.size(); ++i) c.data[i] = f.bytes[i] != 0;
  return c;
}

}  // namespace ndc::io
