#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "ndc/data/mesh_field.hpp"
#include "ndc/kdtree.hpp"
#include "ndc/metrics.hpp"
#include "nn_search_oracle.hpp"

using namespace ndc;
using namespace ndc::metrics;
using ndc::test::brute_nn;

namespace {

TriMesh unit_square(double z = 0.0) {
  return {{Vec3(0, 0, z), Vec3(1, 0, z), Vec3(1, 1, z), Vec3(0, 1, z)}, {{0, 1, 2}, {0, 2, 3}}};
}

TriMesh transformed(const TriMesh& m, const Eigen::Matrix3d& r, const Vec3& t) {
  TriMesh out = m;
  for (Vec3& v : out.vertices) v = r * v + t;
  return out;
}

SampledSurface transformed(const SampledSurface& s, const Eigen::Matrix3d& r, const Vec3& t) {
  SampledSurface out = s;
  for (Vec3& p : out.points) p = r * p + t;
  for (Vec3& n : out.normals) n = r * n;
  return out;
}

double law_of_cosines_deg(double opposite, double s1, double s2) {
  const double c = (s1 * s1 + s2 * s2 - opposite * opposite) / (2.0 * s1 * s2);
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

double distance_to_cube_edges(const Vec3& p, double half) {
  // Distance to the nearest of the 12 cube edges of [-h, h]^3.
  double best = INFINITY;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (double sb : {-half, half})
      for (double sc : {-half, half}) {
        const double along = std::max(0.0, std::abs(p[a]) - half);
        best = std::min(best, std::sqrt(along * along + (p[b] - sb) * (p[b] - sb) + (p[c] - sc) * (p[c] - sc)));
      }
  }
  return best;
}

}  // namespace

TEST_CASE("surface samples split by area and carry face normals") {
  const SampledSurface s = sample_surface(unit_square(), 10000, 3);
  REQUIRE(s.points.size() == 10000);
  std::size_t first = 0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    first += s.faces[i] == 0;
    CHECK(s.points[i][2] == 0.0);
    CHECK(std::abs(std::abs(s.normals[i][2]) - 1.0) < 1e-15);
  }
  // Binomial(10000, 1/2): sd 50.
  CHECK(std::abs(double(first) - 5000.0) <= 150.0);

  const SampledSurface again = sample_surface(unit_square(), 10000, 3);
  CHECK(again.points == s.points);
  CHECK(again.faces == s.faces);
  CHECK_THROWS_AS(sample_surface(TriMesh{}, 10, 0), Error);
  const TriMesh flat{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, {{0, 1, 2}}};
  CHECK_THROWS_AS(sample_surface(flat, 10, 0), Error);
}

TEST_CASE("chamfer of a surface with itself") {
  const SampledSurface s = sample_surface(unit_square(), 2000, 1);
  const ChamferF1 c = chamfer_f1(s, s, 0.003);
  CHECK(c.cd == 0.0);
  CHECK(c.f1 == 1.0);
  const NormalConsistency n = normal_consistency(s, s);
  CHECK(n.nc == 1.0);
  for (int t = 0; t < 3; ++t) {
    CHECK(n.in_gt[t] == 0.0);
    CHECK(n.in_pred[t] == 0.0);
  }
}

TEST_CASE("parallel planes give twice the squared gap") {
  const double d = 0.05;
  const SampledSurface a = sample_surface(unit_square(0.0), 10000, 1);
  const SampledSurface b = sample_surface(unit_square(d), 10000, 2);
  const ChamferF1 c = chamfer_f1(a, b, 0.003);
  CHECK(std::abs(c.cd - 2.0 * d * d) < 0.05 * 2.0 * d * d);
  CHECK(c.f1 == 0.0);
  // Gap within tau: everything matches.
  CHECK(chamfer_f1(a, b, 0.06).f1 == 1.0);
}

TEST_CASE("chamfer and f1 match a brute-force oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampledSurface a, b;
  for (int i = 0; i < 500; ++i) {
    a.points.emplace_back(u(rng), u(rng), u(rng));
    a.normals.push_back(Vec3::UnitZ());
    a.faces.push_back(0);
  }
  for (int i = 0; i < 400; ++i) {
    b.points.emplace_back(u(rng), u(rng), u(rng));
    b.normals.push_back(Vec3(u(rng), u(rng), u(rng)).normalized());
    b.faces.push_back(0);
  }
  const double tau = 0.08;
  std::vector<double> ab, ba;
  brute_nn(a.points, b.points, ab);
  brute_nn(b.points, a.points, ba);
  double sab = 0, sba = 0;
  std::size_t rec = 0, pre = 0;
  for (double x : ab) sab += x, rec += x <= tau * tau;
  for (double x : ba) sba += x, pre += x <= tau * tau;
  const double r = double(rec) / 500.0, p = double(pre) / 400.0;
  const ChamferF1 c = chamfer_f1(a, b, tau);
  CHECK(c.cd == sab / 500.0 + sba / 400.0);
  CHECK(c.recall == r);
  CHECK(c.precision == p);
  CHECK(c.f1 == 2.0 * p * r / (p + r));

  // Symmetric in its arguments.
  const ChamferF1 swapped = chamfer_f1(b, a, tau);
  CHECK(swapped.cd == c.cd);
  CHECK(swapped.f1 == c.f1);

  // Normal consistency against the same oracle.
  std::vector<double> sq;
  const std::vector<int> iab = brute_nn(a.points, b.points, sq);
  const std::vector<int> iba = brute_nn(b.points, a.points, sq);
  double dab = 0, dba = 0;
  std::size_t bad30 = 0;
  for (int i = 0; i < 500; ++i) {
    dab += std::abs(a.normals[i].dot(b.normals[iab[i]]));
    bad30 += unoriented_angle_deg(a.normals[i], b.normals[iab[i]]) > 30.0;
  }
  for (int i = 0; i < 400; ++i) dba += std::abs(b.normals[i].dot(a.normals[iba[i]]));
  const NormalConsistency n = normal_consistency(a, b);
  CHECK(n.nc == doctest::Approx(0.5 * (dab / 500.0 + dba / 400.0)).epsilon(1e-14));
  CHECK(n.in_gt[1] == doctest::Approx(100.0 * double(bad30) / 500.0).epsilon(1e-14));
}

TEST_CASE("metrics are invariant under rigid motion and normal flips") {
  const SampledSurface a = sample_surface(data::make_icosphere(Vec3(0.5, 0.5, 0.5), 0.3, 2), 3000, 1);
  const SampledSurface b = sample_surface(data::make_box_mesh(Vec3(0.5, 0.5, 0.5), Vec3(0.25, 0.25, 0.25)), 3000, 2);
  const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Vec3 t(3.0, -1.0, 0.25);
  const SampledSurface ra = transformed(a, r, t), rb = transformed(b, r, t);
  const ChamferF1 c0 = chamfer_f1(a, b, 0.01), c1 = chamfer_f1(ra, rb, 0.01);
  CHECK(std::abs(c0.cd - c1.cd) < 1e-9);
  CHECK(c0.f1 == doctest::Approx(c1.f1).epsilon(1e-9));
  const NormalConsistency n0 = normal_consistency(a, b), n1 = normal_consistency(ra, rb);
  CHECK(std::abs(n0.nc - n1.nc) < 1e-9);

  SampledSurface flipped = b;
  for (std::size_t i = 0; i < flipped.normals.size(); i += 2) flipped.normals[i] = -flipped.normals[i];
  const NormalConsistency nf = normal_consistency(a, flipped);
  CHECK(nf.nc == n0.nc);
  CHECK(nf.in_gt == n0.in_gt);
  CHECK(nf.in_pred == n0.in_pred);
}

TEST_CASE("perpendicular planes are fully inconsistent") {
  const SampledSurface a = sample_surface(unit_square(), 2000, 1);
  const TriMesh wall{{Vec3(0, 0.5, -0.5), Vec3(1, 0.5, -0.5), Vec3(1, 0.5, 0.5), Vec3(0, 0.5, 0.5)},
                     {{0, 1, 2}, {0, 2, 3}}};
  const SampledSurface b = sample_surface(wall, 2000, 2);
  const NormalConsistency n = normal_consistency(a, b);
  CHECK(n.nc < 1e-12);
  for (int t = 0; t < 3; ++t) {
    CHECK(n.in_gt[t] == 100.0);
    CHECK(n.in_pred[t] == 100.0);
  }
}

TEST_CASE("normal consistency follows the rotation angle") {
  const SampledSurface a = sample_surface(unit_square(), 1000, 1);
  for (double deg : {0.0, 3.0, 15.0, 45.0, 70.0, 89.0, 120.0}) {
    CAPTURE(deg);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitX()).toRotationMatrix();
    const SampledSurface b = sample_surface(transformed(unit_square(), r, Vec3(0, 0, 0.2)), 1000, 2);
    const double folded = deg > 90.0 ? 180.0 - deg : deg;
    const NormalConsistency n = normal_consistency(a, b);
    CHECK(n.nc == doctest::Approx(std::cos(folded * std::numbers::pi / 180.0)).epsilon(1e-9));
    for (int t = 0; t < 3; ++t) {
      const double expect = folded > kInaccurateNormalDegrees[t] ? 100.0 : 0.0;
      CHECK(n.in_gt[t] == expect);
      CHECK(n.in_pred[t] == expect);
    }
  }
}

TEST_CASE("smooth sphere has no edge samples") {
  const SampledSurface s = sample_surface(data::make_icosphere(Vec3(0.5, 0.5, 0.5), 0.5, 4), 20000, 1);
  CHECK(edge_samples(s, {0.01 * std::sqrt(3.0), 30.0}).empty());
}

TEST_CASE("cube edge samples lie near the cube's edges") {
  const double h = 0.5;
  const TriMesh cube = data::make_box_mesh(Vec3::Zero(), Vec3::Constant(h));
  const SampledSurface s = sample_surface(cube, 20000, 1);
  const double r = 0.01 * std::sqrt(3.0);
  const std::vector<int> e = edge_samples(s, {r, 30.0});
  REQUIRE(!e.empty());
  std::size_t near = 0;
  for (int i : e) near += distance_to_cube_edges(s.points[i], h) <= r;
  CHECK(double(near) >= 0.95 * double(e.size()));
  // About 12 edges x 2r strip x 1 length out of area 6.
  CHECK(double(e.size()) > 0.5 * 20000 * 12 * 2 * r / 6.0);

  const EdgeMetrics same = edge_metrics(s, s, {r, 30.0}, 0.003 * std::sqrt(3.0));
  CHECK(same.ecd == 0.0);
  CHECK(same.ef1 == 1.0);

  const SampledSurface sphere = sample_surface(data::make_icosphere(Vec3::Zero(), 0.5, 4), 20000, 2);
  const EdgeMetrics none = edge_metrics(s, sphere, {r, 30.0}, 0.003 * std::sqrt(3.0));
  CHECK(none.edges_b == 0);
  CHECK(none.ecd == EdgeMetrics::kMissing);
  CHECK(none.ef1 == 0.0);
}

TEST_CASE("small angle percentages") {
  const double s3 = std::sqrt(3.0);
  const TriMesh equilateral{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, s3 / 2, 0)}, {{0, 1, 2}}};
  CHECK(small_angles(equilateral).pct == std::array<double, 3>{0.0, 0.0, 0.0});
  const TriMesh right{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}}};
  CHECK(small_angles(right).pct == std::array<double, 3>{0.0, 0.0, 0.0});
  // Angles 5, 85, 90 degrees.
  const double t5 = std::tan(5.0 * std::numbers::pi / 180.0);
  const TriMesh thin{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, t5, 0)}, {{0, 1, 2}}};
  for (double p : small_angles(thin).pct) CHECK(p == doctest::Approx(100.0 / 3.0));
  // 15-degree corner: below 20 and 30 only.
  const double t15 = std::tan(15.0 * std::numbers::pi / 180.0);
  const TriMesh mid{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, t15, 0)}, {{0, 1, 2}}};
  const SmallAngles sm = small_angles(mid);
  CHECK(sm.pct[0] == 0.0);
  CHECK(sm.pct[1] == doctest::Approx(100.0 / 3.0));

  const TriMesh with_degenerate{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, s3 / 2, 0), Vec3(2, 0, 0)},
                                {{0, 1, 2}, {0, 1, 3}}};
  const SmallAngles d = small_angles(with_degenerate);
  CHECK(d.degenerate_triangles == 1);
  CHECK(d.angles == 6);
  for (double p : d.pct) CHECK(p == doctest::Approx(50.0));
  CHECK_THROWS_AS(small_angles(TriMesh{}), Error);
}

TEST_CASE("small angles match a law-of-cosines oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TriMesh m;
  for (int i = 0; i < 300; ++i) m.vertices.emplace_back(u(rng), u(rng), u(rng));
  std::uniform_int_distribution<int> pick(0, 299);
  for (int f = 0; f < 500; ++f) {
    int a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    m.triangles.push_back({a, b, c});
  }
  std::array<std::size_t, 3> below{};
  for (const auto& t : m.triangles) {
    const Vec3 &p = m.vertices[t[0]], &q = m.vertices[t[1]], &r = m.vertices[t[2]];
    const double a = (q - r).norm(), b = (p - r).norm(), c = (p - q).norm();
    for (double ang : {law_of_cosines_deg(a, b, c), law_of_cosines_deg(b, a, c), law_of_cosines_deg(c, a, b)})
      for (int k = 0; k < 3; ++k) below[k] += ang < kSmallAngleDegrees[k];
  }
  const SmallAngles s = small_angles(m);
  for (int k = 0; k < 3; ++k)
    CHECK(s.pct[k] == doctest::Approx(100.0 * double(below[k]) / double(3 * m.triangles.size())));
}

TEST_CASE("evaluate normalizes to the reference bounding box") {
  const TriMesh gt = data::make_box_mesh(Vec3(0.5, 0.5, 0.5), Vec3(0.4, 0.3, 0.2));
  const TriMesh pred = data::make_icosphere(Vec3(0.5, 0.5, 0.5), 0.3, 3);
  EvalOptions o;
  o.samples = 5000;
  o.seed = 4;
  const MetricsReport r = evaluate(gt, pred, o);
  CHECK(r.scale == doctest::Approx(1.0 / 0.8));
  CHECK(r.tau == doctest::Approx(0.003 * std::sqrt(1.0 + 0.75 * 0.75 + 0.5 * 0.5)));
  CHECK(r.t_count == pred.triangles.size());
  CHECK(r.topology.boundary == 0);

  // Scaling and moving both meshes leaves every number unchanged.
  const Eigen::Matrix3d s = 7.0 * Eigen::Matrix3d::Identity();
  const MetricsReport big = evaluate(transformed(gt, s, Vec3(1, 2, 3)), transformed(pred, s, Vec3(1, 2, 3)), o);
  CHECK(std::abs(big.cd - r.cd) < 1e-9);
  CHECK(big.f1 == doctest::Approx(r.f1).epsilon(1e-9));
  CHECK(std::abs(big.nc - r.nc) < 1e-9);

  const MetricsReport self = evaluate(gt, gt, o);
  CHECK(self.cd == 0.0);
  CHECK(self.f1 == 1.0);
  CHECK(self.ecd == 0.0);
  CHECK(self.ef1 == 1.0);

  const std::string kv = to_key_value(r);
  CHECK(kv.find("\ncd=") != std::string::npos);
  CHECK(kv.find("\ncd_x1e5=") != std::string::npos);
  const std::string header = csv_header(), row = csv_row("x", r);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK_THROWS_AS(evaluate(gt, TriMesh{}, o), Error);
}
