#include "ndc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "ndc/kdtree.hpp"

namespace ndc::metrics {

SampledSurface sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  const SurfaceSamples s = sample_triangles(mesh, n, seed);
  if (s.points.empty()) throw Error(ErrorCode::EmptyMesh, "sample_surface needs a mesh with area");
  SampledSurface out{s.points, {}, s.triangles};
  out.normals.reserve(s.points.size());
  for (int f : s.triangles) {
    const auto& t = mesh.triangles[f];
    const Vec3& a = mesh.vertices[t[0]];
    out.normals.push_back((mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).normalized());
  }
  return out;
}

void nearest_neighbors(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets,
                       std::vector<double>& sq_dist, std::vector<int>& index) {
  if (targets.empty()) throw Error(ErrorCode::EmptyMesh, "nearest_neighbors needs targets");
  const KdTree tree(targets);
  sq_dist.resize(queries.size());
  index.resize(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const Neighbor nb = tree.nearest(queries[i]);
    sq_dist[i] = nb.sq_dist;
    index[i] = nb.index;
  }
}

namespace {

void require_samples(const SampledSurface& s, const char* op) {
  if (s.points.empty()) throw Error(ErrorCode::EmptyMesh, std::string(op) + " needs samples");
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double fraction_within(const std::vector<double>& sq, double tau) {
  std::size_t n = 0;
  for (double d : sq) n += d <= tau * tau;
  return double(n) / double(sq.size());
}

}  // namespace

ChamferF1 chamfer_f1(const SampledSurface& a, const SampledSurface& b, double tau) {
  require_samples(a, "chamfer_f1");
  require_samples(b, "chamfer_f1");
  std::vector<double> ab, ba;
  std::vector<int> ia, ib;
  nearest_neighbors(a.points, b.points, ab, ia);
  nearest_neighbors(b.points, a.points, ba, ib);
  ChamferF1 r;
  r.cd = mean(ab) + mean(ba);
  r.recall = fraction_within(ab, tau);
  r.precision = fraction_within(ba, tau);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

double unoriented_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::min(1.0, std::abs(a.dot(b)));
  return std::acos(c) * 180.0 / std::numbers::pi;
}

NormalConsistency normal_consistency(const SampledSurface& a, const SampledSurface& b) {
  require_samples(a, "normal_consistency");
  require_samples(b, "normal_consistency");
  auto direction = [](const SampledSurface& from, const SampledSurface& to, std::array<double, 3>& in_pct) {
    std::vector<double> sq;
    std::vector<int> idx;
    nearest_neighbors(from.points, to.points, sq, idx);
    double dots = 0.0;
    std::array<std::size_t, 3> bad{};
    for (std::size_t i = 0; i < from.points.size(); ++i) {
      const Vec3& n1 = from.normals[i];
      const Vec3& n2 = to.normals[idx[i]];
      dots += std::abs(n1.dot(n2));
      const double ang = unoriented_angle_deg(n1, n2);
      for (int t = 0; t < 3; ++t) bad[t] += ang > kInaccurateNormalDegrees[t];
    }
    for (int t = 0; t < 3; ++t) in_pct[t] = 100.0 * double(bad[t]) / double(from.points.size());
    return dots / double(from.points.size());
  };
  NormalConsistency r;
  const double ab = direction(a, b, r.in_gt);
  const double ba = direction(b, a, r.in_pred);
  r.nc = 0.5 * (ab + ba);
  return r;
}

std::vector<int> edge_samples(const SampledSurface& s, const EdgeParams& params) {
  std::vector<int> out;
  if (s.points.empty()) return out;
  const KdTree tree(s.points);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    for (int j : tree.within_radius(s.points[i], params.radius)) {
      if (std::size_t(j) == i) continue;
      if (unoriented_angle_deg(s.normals[i], s.normals[j]) > params.angle_deg) {
        out.push_back(int(i));
        break;
      }
    }
  }
  return out;
}

SampledSurface subset(const SampledSurface& s, const std::vector<int>& keep) {
  SampledSurface out;
  for (int i : keep) {
    out.points.push_back(s.points[i]);
    out.normals.push_back(s.normals[i]);
    out.faces.push_back(s.faces[i]);
  }
  return out;
}

EdgeMetrics edge_metrics(const SampledSurface& a, const SampledSurface& b, const EdgeParams& params, double tau) {
  EdgeMetrics r;
  const SampledSurface ea = subset(a, edge_samples(a, params));
  const SampledSurface eb = subset(b, edge_samples(b, params));
  r.edges_a = ea.points.size();
  r.edges_b = eb.points.size();
  if (ea.points.empty() || eb.points.empty()) return r;
  const ChamferF1 c = chamfer_f1(ea, eb, tau);
  r.ecd = c.cd;
  r.ef1 = c.f1;
  return r;
}

SmallAngles small_angles(const TriMesh& mesh) {
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "small_angles needs triangles");
  SmallAngles r;
  std::array<std::size_t, 3> below{};
  for (const auto& t : mesh.triangles) {
    const Vec3 p[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    if (!((p[1] - p[0]).cross(p[2] - p[0]).norm() > 0.0)) {
      ++r.degenerate_triangles;
      for (int k = 0; k < 3; ++k) below[k] += 3;
      continue;
    }
    for (int c = 0; c < 3; ++c) {
      const Vec3 u = p[(c + 1) % 3] - p[c], v = p[(c + 2) % 3] - p[c];
      const double ang = std::atan2(u.cross(v).norm(), u.dot(v)) * 180.0 / std::numbers::pi;
      for (int k = 0; k < 3; ++k) below[k] += ang < kSmallAngleDegrees[k];
    }
  }
  r.angles = 3 * mesh.triangles.size();
  for (int k = 0; k < 3; ++k) r.pct[k] = 100.0 * double(below[k]) / double(r.angles);
  return r;
}

MetricsReport evaluate(const TriMesh& gt, const TriMesh& pred, const EvalOptions& o) {
  if (gt.triangles.empty() || pred.triangles.empty())
    throw Error(ErrorCode::EmptyMesh, "evaluate needs two non-empty meshes");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const auto& t : gt.triangles)
    for (int v : t) {
      lo = lo.cwiseMin(gt.vertices[v]);
      hi = hi.cwiseMax(gt.vertices[v]);
    }
  const double extent = (hi - lo).maxCoeff();
  const double scale = extent > 0.0 ? 1.0 / extent : 1.0;
  auto normalized = [&](const TriMesh& m) {
    TriMesh out = m;
    for (Vec3& v : out.vertices) v = (v - lo) * scale;
    return out;
  };
  const TriMesh g = normalized(gt), p = normalized(pred);
  const double diag = (hi - lo).norm() * scale;

  MetricsReport r;
  r.samples = o.samples;
  r.seed = o.seed;
  r.scale = scale;
  r.tau = o.tau_fraction * diag;
  r.edge_radius = o.edge_radius_fraction * diag;
  r.edge_angle_deg = o.edge_angle_deg;

  const SampledSurface sg = sample_surface(g, o.samples, o.seed);
  const SampledSurface sp = sample_surface(p, o.samples, o.seed);
  const ChamferF1 c = chamfer_f1(sg, sp, r.tau);
  r.cd = c.cd;
  r.f1 = c.f1;
  const NormalConsistency n = normal_consistency(sg, sp);
  r.nc = n.nc;
  r.in_gt = n.in_gt;
  r.in_pred = n.in_pred;
  const EdgeMetrics e = edge_metrics(sg, sp, {r.edge_radius, r.edge_angle_deg}, r.tau);
  r.ecd = e.ecd;
  r.ef1 = e.ef1;
  r.sa = small_angles(pred).pct;
  r.v_count = pred.vertices.size();
  r.t_count = pred.triangles.size();
  r.topology = edge_topology_stats(pred);
  return r;
}

namespace {

template <class Fn>
void for_each_field(const MetricsReport& r, Fn&& fn) {
  fn("cd", r.cd);
  fn("cd_x1e5", r.cd * 1e5);
  fn("f1", r.f1);
  fn("nc", r.nc);
  fn("ecd", r.ecd);
  fn("ef1", r.ef1);
  for (int t = 0; t < 3; ++t) {
    const std::string deg = std::to_string(int(kInaccurateNormalDegrees[t]));
    fn("in_gt_" + deg, r.in_gt[t]);
    fn("in_pred_" + deg, r.in_pred[t]);
  }
  for (int t = 0; t < 3; ++t) fn("sa_" + std::to_string(int(kSmallAngleDegrees[t])), r.sa[t]);
  fn("v_count", double(r.v_count));
  fn("t_count", double(r.t_count));
  fn("edges_total", double(r.topology.total));
  fn("edges_boundary", double(r.topology.boundary));
  fn("edges_manifold", double(r.topology.manifold));
  fn("edges_nonmanifold3", double(r.topology.non_manifold_3));
  fn("edges_nonmanifold4", double(r.topology.non_manifold_4));
  fn("edges_nonmanifold_more", double(r.topology.non_manifold_more));
  fn("tau", r.tau);
  fn("edge_radius", r.edge_radius);
  fn("edge_angle_deg", r.edge_angle_deg);
  fn("samples", double(r.samples));
  fn("seed", double(r.seed));
  fn("scale", r.scale);
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

std::string to_key_value(const MetricsReport& r) {
  std::string out = "normalization=gt_bbox_longest_side_to_unit\n";
  for_each_field(r, [&](const std::string& k, double v) { out += k + "=" + number(v) + "\n"; });
  return out;
}

std::string csv_header() {
  std::string h = "label";
  for_each_field(MetricsReport{}, [&](const std::string& k, double) { h += "," + k; });
  return h + "\n";
}

std::string csv_row(const std::string& label, const MetricsReport& r) {
  std::string row = label;
  for_each_field(r, [&](const std::string&, double v) { row += "," + number(v); });
  return row + "\n";
}

}  // namespace ndc::metrics
