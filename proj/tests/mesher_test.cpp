#include <doctest.h>

#include <random>

#include "ndc/isosurf.hpp"
#include "ndc/mesher.hpp"
#include "test_util.hpp"

using namespace ndc;

namespace {

SignGrid random_interior_signs(std::mt19937_64& rng, const GridDims& d, double p_inside) {
  std::bernoulli_distribution coin(p_inside);
  SignGrid s(d, 0);
  for_each_index(d.vertex_shape(), [&](int i, int j, int l) {
    const bool shell = i == 0 || j == 0 || l == 0 || i == d.m - 1 || j == d.n - 1 || l == d.k - 1;
    s.at(i, j, l) = !shell && coin(rng);
  });
  return s;
}

VertexOffsetGrid random_offsets(std::mt19937_64& rng, const GridDims& d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VertexOffsetGrid v(d);
  for (auto& o : v.data) o = Vec3(u(rng), u(rng), u(rng));
  return v;
}

int interior_flag_count(const FlagField& f) {
  int n = 0;
  for (int a = 0; a < 3; ++a)
    for_each_index(f.dims.edge_shape(a), [&](int i, int j, int l) {
      n += f.at(a, i, j, l) && is_interior_edge(f.dims, a, i, j, l);
    });
  return n;
}

FlagField sphere_flags(const GridDims& d) {
  return xor_flags(signs_from_scalar(test::sample_sdf(d, test::Sphere(d))));
}

// First flagged interior edge in storage order whose lattice neighbourhood is
// flat enough that all four surrounding faces carry exactly two flags.
std::array<int, 4> pick_removable_edge(const FlagField& f, int skip = 0) {
  for (int a = 0; a < 3; ++a) {
    std::array<int, 4> found{-1, 0, 0, 0};
    for_each_index(f.dims.edge_shape(a), [&](int i, int j, int l) {
      if (found[0] >= 0 || !f.at(a, i, j, l) || !is_interior_edge(f.dims, a, i, j, l)) return;
      FlagField g = f;
      g.at(a, i, j, l) = 0;
      const auto before = edge_topology_stats(undc_extract(g, VertexOffsetGrid(g.dims, Vec3::Constant(0.5))));
      if (before.boundary == 4 && skip-- == 0) found = {a, i, j, l};
    });
    if (found[0] >= 0) return found;
  }
  FAIL("no removable edge");
  return {};
}

Vec3 quad_normal(const QuadMesh& m, const std::array<int, 4>& q) {
  Vec3 n = Vec3::Zero();
  for (int c = 0; c < 4; ++c) n += m.vertices[q[c]].cross(m.vertices[q[(c + 1) % 4]]);
  return n;
}

}  // namespace

TEST_CASE("ndc: uniform grids give empty meshes") {
  const GridDims d = GridDims::cube(6);
  const VertexOffsetGrid v(d, Vec3::Constant(0.5));
  CHECK(ndc_extract(SignGrid(d, 0), v).empty());
  CHECK(ndc_extract(SignGrid(d, 1), v).empty());
}

TEST_CASE("ndc: single inside vertex gives a closed cube of six quads") {
  const GridDims d = GridDims::cube(5);
  SignGrid s(d, 0);
  s.at(2, 2, 2) = 1;
  const QuadMesh m = ndc_extract(s, VertexOffsetGrid(d, Vec3::Constant(0.5)));
  CHECK(m.quads.size() == 6);
  CHECK(m.vertices.size() == 8);
  const auto st = edge_topology_stats(m);
  CHECK(st.boundary == 0);
  CHECK(st.manifold == 12);
  for (const auto& q : m.quads) {
    Vec3 c = Vec3::Zero();
    for (int k = 0; k < 4; ++k) c += m.vertices[q[k]] / 4.0;
    CHECK(quad_normal(m, q).dot(c - Vec3(2, 2, 2)) > 0.0);
  }
}

TEST_CASE("ndc: with QEF offsets reproduces dual contouring exactly") {
  const GridDims d = GridDims::cube(20);
  const test::Sphere sphere(d);
  const ScalarGrid g = test::sample_sdf(d, sphere);
  const EdgeHermite h = hermite_from_grid(g, EstimatedNormals{});
  const CellVertices cv = qef_cell_vertices(h);
  CHECK(ndc_extract(signs_from_scalar(g), cv.offsets) == dc_extract(g, EstimatedNormals{}));
}

TEST_CASE("ndc: outer shell flags never produce faces") {
  const GridDims d = GridDims::cube(4);
  SignGrid s(d, 0);
  s.at(0, 0, 0) = 1;
  CHECK(ndc_extract(s, VertexOffsetGrid(d, Vec3::Constant(0.5))).quads.empty());
}

TEST_CASE("undc: oriented xor flags equal ndc") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const GridDims d{7 + trial % 3, 6, 8};
    const SignGrid s = random_interior_signs(rng, d, 0.4);
    const VertexOffsetGrid v = random_offsets(rng, d);
    const FlagField f = xor_flags(s);
    const QuadMesh u = undc_extract(f, v);
    const QuadMesh n = ndc_extract(s, v);
    CHECK(u.vertices == n.vertices);
    CHECK(orient_by_signs(u, f, s) == n);
    CHECK(int(u.quads.size()) == interior_flag_count(f));
  }
}

TEST_CASE("undc: a bounded sheet stays open") {
  const GridDims d = GridDims::cube(8);
  FlagField f(d, 0);
  for (int i = 2; i <= 5; ++i)
    for (int j = 2; j <= 5; ++j) f.at(2, i, j, 3) = 1;
  const QuadMesh m = undc_extract(f, VertexOffsetGrid(d, Vec3::Constant(0.5)));
  CHECK(m.quads.size() == 16);
  const auto st = edge_topology_stats(m);
  CHECK(st.boundary == 16);
  CHECK(st.manifold == 24);
}

TEST_CASE("undc: random flags give one quad per flagged interior edge") {
  std::mt19937_64 rng(6);
  std::bernoulli_distribution coin(0.1);
  for (int trial = 0; trial < 20; ++trial) {
    const GridDims d = GridDims::cube(6);
    FlagField f(d, 0);
    for (auto& axis : f.axes)
      for (auto& e : axis) e = coin(rng);
    const QuadMesh m = undc_extract(f, random_offsets(rng, d));
    CHECK(int(m.quads.size()) == interior_flag_count(f));
    for (const auto& q : m.quads)
      for (int c : q) CHECK((c >= 0 && c < int(m.vertices.size())));
  }
}

TEST_CASE("extract: flags take precedence over signs") {
  const GridDims d = GridDims::cube(5);
  SignGrid s(d, 0);
  s.at(2, 2, 2) = 1;
  const VertexOffsetGrid v(d, Vec3::Constant(0.5));
  CHECK(extract({s, std::nullopt, v}) == ndc_extract(s, v));
  CHECK(extract({s, FlagField(d, 0), v}).empty());
  CHECK_THROWS_AS(extract({std::nullopt, std::nullopt, v}), Error);
}

TEST_CASE("close_holes: single missing face is restored") {
  const GridDims d = GridDims::cube(16);
  const FlagField full = sphere_flags(d);
  const auto e = pick_removable_edge(full);
  FlagField holed = full;
  holed.at(e[0], e[1], e[2], e[3]) = 0;
  int passes = 0;
  const FlagField closed = close_holes(holed, kMaxHoleClosingPasses, &passes);
  CHECK(closed == full);
  CHECK(passes == 2);
}

TEST_CASE("close_holes: two adjacent missing faces are restored") {
  const GridDims d = GridDims::cube(16);
  const FlagField full = sphere_flags(d);
  const auto e = pick_removable_edge(full);
  FlagField holed = full;
  holed.at(e[0], e[1], e[2], e[3]) = 0;
  // a flagged neighbour sharing a lattice face with e
  bool removed = false;
  for (int s = 1; s <= 2 && !removed; ++s) {
    const int b = (e[0] + s) % 3;
    for (int side : {-1, 1}) {
      Index3 v{e[1], e[2], e[3]};
      v[b] += side;
      if (full.at(e[0], v[0], v[1], v[2])) {
        holed.at(e[0], v[0], v[1], v[2]) = 0;
        removed = true;
        break;
      }
    }
  }
  REQUIRE(removed);
  CHECK(edge_topology_stats(undc_extract(holed, VertexOffsetGrid(d, Vec3::Constant(0.5)))).boundary == 6);
  CHECK(close_holes(holed) == full);
}

TEST_CASE("close_holes: closed surfaces are a fixpoint") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const FlagField f = xor_flags(random_interior_signs(rng, GridDims::cube(8), 0.3));
    int passes = 0;
    CHECK(close_holes(f, kMaxHoleClosingPasses, &passes) == f);
    CHECK(passes == 1);
  }
}

TEST_CASE("close_holes: only adds flags, only on interior edges, and converges") {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.15);
  for (int trial = 0; trial < 30; ++trial) {
    const GridDims d = GridDims::cube(7);
    FlagField f(d, 0);
    for (auto& axis : f.axes)
      for (auto& e : axis) e = coin(rng);
    int passes = 0;
    const FlagField g = close_holes(f, kMaxHoleClosingPasses, &passes);
    CHECK(passes <= kMaxHoleClosingPasses);
    for (int a = 0; a < 3; ++a)
      for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
        if (f.at(a, i, j, l)) CHECK(g.at(a, i, j, l));
        if (!is_interior_edge(d, a, i, j, l)) CHECK(g.at(a, i, j, l) == f.at(a, i, j, l));
      });
    if (passes < kMaxHoleClosingPasses) CHECK(close_holes(g) == g);
    CHECK(close_holes(f, 0) == f);
  }
}

TEST_CASE("split_quads: counts, determinism and orientation") {
  CHECK(split_quads(QuadMesh{}, 1).triangles.empty());

  const QuadMesh one{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)}, {{0, 1, 2, 3}}};
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const TriMesh t = split_quads(one, seed);
    REQUIRE(t.triangles.size() == 2);
    double area = 0;
    for (const auto& tri : t.triangles) {
      const Vec3& a = t.vertices[tri[0]];
      const Vec3 n = (t.vertices[tri[1]] - a).cross(t.vertices[tri[2]] - a);
      CHECK(n.z() > 0.0);
      area += triangle_area(a, t.vertices[tri[1]], t.vertices[tri[2]]);
    }
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
  }

  const GridDims d = GridDims::cube(24);
  SignGrid s = signs_from_scalar(test::sample_sdf(d, test::Sphere(d)));
  const QuadMesh m = ndc_extract(s, VertexOffsetGrid(d, Vec3::Constant(0.5)));
  const TriMesh a = split_quads(m, 42), b = split_quads(m, 42), c = split_quads(m, 43);
  CHECK(a == b);
  CHECK(a.triangles.size() == 2 * m.quads.size());
  std::size_t differ = 0;
  for (std::size_t q = 0; q < m.quads.size(); ++q) differ += a.triangles[2 * q] != c.triangles[2 * q];
  const double frac = double(differ) / double(m.quads.size());
  CHECK(frac > 0.4);
  CHECK(frac < 0.6);
  CHECK(edge_topology_stats(a).boundary == 0);
}

TEST_CASE("edge_topology_stats: reference shapes") {
  const QuadMesh one{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)}, {{0, 1, 2, 3}}};
  const auto s1 = edge_topology_stats(one);
  CHECK(s1.total == 4);
  CHECK(s1.boundary == 4);
  CHECK(s1.fraction(s1.boundary) == 1.0);

  const GridDims d = GridDims::cube(5);
  SignGrid s(d, 0);
  s.at(2, 2, 2) = 1;
  s.at(3, 2, 2) = 1;
  const auto cuboid = edge_topology_stats(ndc_extract(s, VertexOffsetGrid(d, Vec3::Constant(0.5))));
  CHECK(cuboid.total == 20);
  CHECK(cuboid.manifold == 20);

  // two quads hinged on one edge plus a third: 3-incidence edge
  const QuadMesh fan{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0), Vec3(0, 0, 1),
                      Vec3(1, 0, 1), Vec3(0, -1, 0), Vec3(1, -1, 0)},
                     {{0, 1, 3, 2}, {0, 1, 5, 4}, {0, 1, 7, 6}}};
  const auto sf = edge_topology_stats(fan);
  CHECK(sf.non_manifold_3 == 1);
  CHECK(sf.boundary == 9);
  CHECK(EdgeTopologyStats{}.fraction(0) == 0.0);

  const GridDims sd = GridDims::cube(20);
  const auto sphere = edge_topology_stats(
      ndc_extract(signs_from_scalar(test::sample_sdf(sd, test::Sphere(sd))), VertexOffsetGrid(sd, Vec3::Constant(0.5))));
  CHECK(sphere.boundary == 0);
}
