#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ndc/io.hpp"
#include "ndc/isosurf.hpp"
#include "test_util.hpp"

using namespace ndc;
using namespace ndc::io;

namespace {

std::string grid_bytes(const GridFile& f) {
  std::ostringstream out;
  write_grid_file(out, f);
  return out.str();
}

ScalarGrid random_sdf(std::uint64_t seed, int r) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-4.0f, 4.0f);
  ScalarGrid g(GridDims::cube(r), FieldKind::SDF);
  for (double& v : g.values) v = u(rng);
  return g;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ndc_io_test_" + name);
}

}  // namespace

TEST_CASE("ndcgrid header layout matches a hand-built byte string") {
  GridFile f;
  f.dims = {2, 3, 4};
  f.payload = GridPayload::VertexSign;
  f.bytes.assign(24, 0);
  f.bytes[5] = 1;
  const std::string s = grid_bytes(f);
  std::string expect = "NDCG";
  expect += char(1);
  for (std::uint32_t v : {2u, 3u, 4u})
    for (int b = 0; b < 4; ++b) expect += char((v >> (8 * b)) & 0xff);
  expect += char(1);
  expect.append(f.bytes.begin(), f.bytes.end());
  CHECK(s == expect);
}

TEST_CASE("ndcgrid f32 payload is little-endian IEEE") {
  GridFile f;
  f.dims = {2, 2, 2};
  f.payload = GridPayload::VertexScalar;
  f.reals.assign(8, 0.0f);
  f.reals[0] = 1.0f;  // 0x3f800000
  const std::string s = grid_bytes(f);
  REQUIRE(s.size() == 4 + 1 + 12 + 1 + 32);
  CHECK((unsigned char)s[18] == 0x00);
  CHECK((unsigned char)s[19] == 0x00);
  CHECK((unsigned char)s[20] == 0x80);
  CHECK((unsigned char)s[21] == 0x3f);
}

TEST_CASE("random 16^3 sdf grid round-trips bit-identically") {
  const ScalarGrid g = random_sdf(7, 16);
  const auto path = temp_path("sdf.ndcg");
  save_scalar_grid(path, g);
  const ScalarGrid back = load_scalar_grid(path, FieldKind::SDF);
  CHECK(back == g);
  std::ifstream in(path, std::ios::binary);
  const std::string first((std::istreambuf_iterator<char>(in)), {});
  save_scalar_grid(path, back);
  std::ifstream in2(path, std::ios::binary);
  const std::string second((std::istreambuf_iterator<char>(in2)), {});
  CHECK(first == second);
  CHECK(first.size() == 18 + 4 * 16 * 16 * 16);
  std::filesystem::remove(path);
}

TEST_CASE("every payload kind round-trips") {
  const GridDims d{3, 4, 5};
  std::mt19937_64 rng(3);
  for (int code = 0; code <= 4; ++code) {
    GridFile f;
    f.dims = d;
    f.payload = GridPayload(code);
    const std::size_t n = payload_count(d, f.payload);
    const bool real = code == 0 || code == 2 || code == 4;
    if (real) {
      for (std::size_t i = 0; i < n; ++i) f.reals.push_back(float(rng() % 1000) / 7.0f);
    } else {
      for (std::size_t i = 0; i < n; ++i) f.bytes.push_back(std::uint8_t(rng() & 1));
    }
    std::istringstream in(grid_bytes(f));
    const GridFile back = read_grid_file(in);
    CHECK(back.dims == f.dims);
    CHECK(back.payload == f.payload);
    CHECK(back.reals == f.reals);
    CHECK(back.bytes == f.bytes);
  }
  CHECK(payload_count(d, GridPayload::CellVector) == 3 * d.cell_count());
  CHECK(payload_count(d, GridPayload::EdgeByte) == d.total_edge_count());
}

TEST_CASE("typed helpers round-trip signs, offsets, flags and cell masks") {
  const GridDims d{5, 4, 6};
  std::mt19937_64 rng(11);
  SignGrid s(d);
  for (auto& v : s.data) v = std::uint8_t(rng() & 1);
  VertexOffsetGrid o(d);
  for (auto& v : o.data) v = Vec3(float(rng() % 64) / 64.0f, 0.25, 1.0);
  FlagField fl(d);
  for (auto& ax : fl.axes)
    for (auto& v : ax) v = std::uint8_t(rng() & 1);
  CellField<std::uint8_t> cm(d);
  for (auto& v : cm.data) v = std::uint8_t(rng() & 1);
  const auto p = temp_path("typed.ndcg");
  save_signs(p, s);
  CHECK(load_signs(p) == s);
  save_offsets(p, o);
  CHECK(load_offsets(p) == o);
  save_flags(p, fl);
  CHECK(load_flags(p) == fl);
  save_cell_bytes(p, cm);
  CHECK(load_cell_bytes(p) == cm);
  CHECK(load_signs(p).dims == GridDims{4, 3, 5});  // cell masks are sign payloads over cell dims
  save_flags(p, fl);
  try {
    load_signs(p);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  std::filesystem::remove(p);
}

TEST_CASE("ndcgrid errors") {
  GridFile f;
  f.dims = {2, 2, 2};
  f.payload = GridPayload::VertexSign;
  f.bytes.assign(8, 1);
  const std::string good = grid_bytes(f);
  auto code_of = [](const std::string& bytes) {
    std::istringstream in(bytes);
    try {
      read_grid_file(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  std::string bad = good;
  bad[0] = 'X';
  CHECK(code_of(bad) == ErrorCode::BadMagic);
  bad = good;
  bad[4] = 2;
  CHECK(code_of(bad) == ErrorCode::VersionMismatch);
  bad = good;
  bad[17] = 9;
  CHECK(code_of(bad) == ErrorCode::ShapeMismatch);
  bad = good;
  bad[5] = 1;  // m = 1
  CHECK(code_of(bad) == ErrorCode::ShapeMismatch);
  CHECK(code_of(good.substr(0, good.size() - 1)) == ErrorCode::TruncatedPayload);
  CHECK(code_of(good.substr(0, 10)) == ErrorCode::TruncatedPayload);
  CHECK(code_of("") == ErrorCode::TruncatedPayload);
}

TEST_CASE("unit quad obj text") {
  PolyMesh m{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)}, {{0, 1, 2, 3}}};
  std::ostringstream out;
  write_obj(out, m);
  CHECK(out.str() == "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  std::istringstream in(out.str());
  CHECK(read_obj(in) == m);
}

TEST_CASE("sphere dc output round-trips through obj") {
  const GridDims d = GridDims::cube(20);
  const QuadMesh q = dc_extract(test::sample_sdf(d, test::Sphere(d)), EstimatedNormals{});
  const TriMesh t = triangulate_fixed(q);
  std::ostringstream out;
  write_obj(out, to_poly(t));
  std::istringstream in(out.str());
  const TriMesh back = triangulate(read_obj(in));
  CHECK(back.triangles == t.triangles);
  REQUIRE(back.vertices.size() == t.vertices.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < t.vertices.size(); ++i)
    worst = std::max(worst, (back.vertices[i] - t.vertices[i]).cwiseAbs().maxCoeff());
  CHECK(worst == 0.0);  // shortest round-trip decimal is exact
}

TEST_CASE("obj reader details") {
  SUBCASE("two-vertex face is an error naming the line") {
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n");
    try {
      read_obj(in);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }
  SUBCASE("slash forms, negative indices and skipped records") {
    std::istringstream in(
        "# comment\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nvt 0 0\nf 1/1/1 2//1 -1\ng group\n");
    ObjReadReport r;
    const PolyMesh m = read_obj(in, &r);
    CHECK(m.vertices.size() == 3);
    REQUIRE(m.faces.size() == 1);
    CHECK(m.faces[0] == std::vector<int>{0, 1, 2});
    CHECK(r.skipped_records == 3);
  }
  SUBCASE("bad number and out-of-range index") {
    std::istringstream a("v 0 x 0\n");
    CHECK_THROWS_AS(read_obj(a), Error);
    std::istringstream b("v 0 0 0\nf 1 2 3\n");
    CHECK_THROWS_AS(read_obj(b), Error);
  }
}

TEST_CASE("ply round trip") {
  PolyMesh m{{Vec3(0.1, 0.2, 0.3), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 1e-9)},
             {{0, 1, 2, 3}, {0, 2, 1}}};
  std::stringstream buf;
  write_ply(buf, m);
  CHECK(read_ply(buf) == m);
  std::istringstream bad("plx\n");
  CHECK_THROWS_AS(read_ply(bad), Error);
}

TEST_CASE("ply reader accepts float coordinates and extra properties") {
  std::string s =
      "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\n"
      "property float y\nproperty float z\nproperty uchar red\nelement face 1\n"
      "property list uchar uint vertex_indices\nend_header\n";
  auto put_f = [&](float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    for (int b = 0; b < 4; ++b) s += char((u >> (8 * b)) & 0xff);
  };
  const float coords[3][3] = {{0, 0, 0}, {1, 0, 0}, {0, 2.5f, 0}};
  for (const auto& c : coords) {
    for (float v : c) put_f(v);
    s += char(200);
  }
  s += char(3);
  for (std::uint32_t i : {0u, 1u, 2u})
    for (int b = 0; b < 4; ++b) s += char((i >> (8 * b)) & 0xff);
  std::istringstream in(s);
  const PolyMesh m = read_ply(in);
  REQUIRE(m.vertices.size() == 3);
  CHECK(m.vertices[2] == Vec3(0, 2.5, 0));
  CHECK(m.faces == std::vector<std::vector<int>>{{0, 1, 2}});
}

TEST_CASE("point clouds round-trip with features") {
  PointCloud c;
  c.feature_channels = 2;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    c.points.emplace_back(n(rng), n(rng), n(rng));
    c.features.push_back(n(rng));
    c.features.push_back(n(rng));
  }
  const auto p = temp_path("cloud.ply");
  save_point_cloud(p, c);
  CHECK(load_point_cloud(p) == c);
  c.feature_channels = 0;
  c.features.clear();
  save_point_cloud(p, c);
  CHECK(load_point_cloud(p) == c);
  std::filesystem::remove(p);
}
