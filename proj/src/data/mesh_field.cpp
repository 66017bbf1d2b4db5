#include "ndc/data/mesh_field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include <Eigen/Geometry>

#include "ndc/mesher.hpp"

namespace ndc::data {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk over vertices, edges, then the face.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  if (!std::isfinite(denom)) return a;  // degenerate triangle
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

bool is_watertight(const TriMesh& mesh) {
  if (mesh.empty()) return false;
  const EdgeTopologyStats s = edge_topology_stats(mesh);
  return s.total == s.manifold;
}

namespace {

// Moller-Trumbore; true when the ray hits the triangle at distance > 0.
bool ray_hits(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 h = d.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 s = o - a;
  const double u = s.dot(h) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  return e2.dot(q) * inv > 0.0;
}

const std::array<Vec3, 3>& parity_rays() {
  static const std::array<Vec3, 3> rays = {Vec3(1.0, 0.3127, 0.1471).normalized(),
                                           Vec3(-0.2231, 1.0, 0.4173).normalized(),
                                           Vec3(0.1913, -0.3571, 1.0).normalized()};
  return rays;
}

}  // namespace

bool inside_mesh(const TriMesh& mesh, const Vec3& p) {
  int votes = 0;
  for (const Vec3& d : parity_rays()) {
    int hits = 0;
    for (const auto& t : mesh.triangles)
      if (ray_hits(p, d, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]])) ++hits;
    votes += hits & 1;
  }
  return votes >= 2;
}

ScalarGrid mesh_to_sdf_grid(const TriMesh& mesh, const GridDims& dims, FieldKind kind) {
  if (kind == FieldKind::OCC) throw Error(ErrorCode::InvalidKind, "mesh_to_sdf_grid samples distances only");
  dims.validate();
  if (mesh.empty()) throw Error(ErrorCode::EmptyMesh, "mesh_to_sdf_grid needs triangles");
  if (kind == FieldKind::SDF && !is_watertight(mesh))
    throw Error(ErrorCode::OpenMeshError, "signed distance requested for a mesh that is not watertight");
  ScalarGrid g(dims, kind);
  for_each_index(dims.vertex_shape(), [&](int i, int j, int l) {
    const Vec3 p(i, j, l);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : mesh.triangles)
      best = std::min(best, point_triangle_distance(p, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    if (kind == FieldKind::SDF && inside_mesh(mesh, p)) best = -best;
    g.at(i, j, l) = best;
  });
  return g;
}

EdgeHermite mesh_edge_data(const TriMesh& mesh, const GridDims& dims, const SignGrid* signs) {
  dims.validate();
  const bool by_signs = signs != nullptr;
  if (by_signs && signs->dims != dims) throw Error(ErrorCode::ShapeError, "signs do not match dims");
  EdgeHermite h{FlagField(dims, 0), EdgeField<double>(dims, 0.0), EdgeField<Vec3>(dims, Vec3::Zero())};
  EdgeField<std::uint8_t> hit(dims, 0);

  for (const auto& tri : mesh.triangles) {
    const Vec3& p0 = mesh.vertices[tri[0]];
    const Vec3& p1 = mesh.vertices[tri[1]];
    const Vec3& p2 = mesh.vertices[tri[2]];
    const Vec3 n = (p1 - p0).cross(p2 - p0);
    if (!(n.norm() > 0.0)) continue;
    const Vec3 unit = n.normalized();
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3, c = (a + 2) % 3;
      // Lines x_b = jb, x_c = jc through the triangle's (b, c) footprint.
      const double area = (p1[b] - p0[b]) * (p2[c] - p0[c]) - (p2[b] - p0[b]) * (p1[c] - p0[c]);
      if (area == 0.0) continue;  // triangle parallel to axis a
      const int jb0 = std::max(0, int(std::ceil(std::min({p0[b], p1[b], p2[b]}))));
      const int jb1 = std::min(dims.count(b) - 1, int(std::floor(std::max({p0[b], p1[b], p2[b]}))));
      const int jc0 = std::max(0, int(std::ceil(std::min({p0[c], p1[c], p2[c]}))));
      const int jc1 = std::min(dims.count(c) - 1, int(std::floor(std::max({p0[c], p1[c], p2[c]}))));
      for (int jc = jc0; jc <= jc1; ++jc)
        for (int jb = jb0; jb <= jb1; ++jb) {
          auto edge_fn = [&](const Vec3& u, const Vec3& v) {
            return (v[b] - u[b]) * (jc - u[c]) - (jb - u[b]) * (v[c] - u[c]);
          };
          double w0 = edge_fn(p1, p2), w1 = edge_fn(p2, p0), w2 = edge_fn(p0, p1);
          if (area < 0.0) {
            w0 = -w0;
            w1 = -w1;
            w2 = -w2;
          }
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          const double s = std::abs(area);
          const double xa = (w0 * p0[a] + w1 * p1[a] + w2 * p2[a]) / s;
          if (xa < 0.0 || xa > dims.count(a) - 1) continue;
          int i = std::min(int(std::floor(xa)), dims.count(a) - 2);
          const double t = xa - i;
          Index3 v{};
          v[a] = i;
          v[b] = jb;
          v[c] = jc;
          // Preferred end of the edge: its inside endpoint, or the lower one.
          bool from_lower = true;
          if (by_signs) from_lower = signs->at(v[0], v[1], v[2]) != 0;
          const double key = from_lower ? t : 1.0 - t;
          auto& seen = hit.at(a, v[0], v[1], v[2]);
          double& cur = h.t.at(a, v[0], v[1], v[2]);
          const double cur_key = from_lower ? cur : 1.0 - cur;
          if (!seen || key < cur_key) {
            seen = 1;
            cur = t;
            h.normals.at(a, v[0], v[1], v[2]) = unit;
          }
        }
    }
  }

  if (!by_signs) {
    h.flags = hit;
    return h;
  }
  h.flags = xor_flags(*signs);
  for (int a = 0; a < 3; ++a)
    for_each_index(dims.edge_shape(a), [&](int i, int j, int l) {
      if (!h.flags.at(a, i, j, l)) {
        h.t.at(a, i, j, l) = 0.0;
        h.normals.at(a, i, j, l) = Vec3::Zero();
      } else if (!hit.at(a, i, j, l)) {
        // Sign change without a recorded hit (grazing contact): midpoint,
        // normal along the edge from the inside end to the outside end.
        h.t.at(a, i, j, l) = 0.5;
        Vec3 n = Vec3::Zero();
        n[a] = signs->at(i, j, l) ? 1.0 : -1.0;
        h.normals.at(a, i, j, l) = n;
      }
    });
  return h;
}

TriMesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = int(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriMesh m;
  for (const auto& p : v) m.vertices.push_back(center + radius * p);
  m.triangles = std::move(f);
  return m;
}

TriMesh make_box_mesh(const Vec3& center, const Vec3& half) {
  TriMesh m;
  for (int s = 0; s < 8; ++s) {
    const Vec3 sg((s & 1) ? 1 : -1, (s & 2) ? 1 : -1, (s & 4) ? 1 : -1);
    m.vertices.push_back(center + sg.cwiseProduct(half));
  }
  // Quads wound counter-clockwise seen from outside.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  return m;
}

TriMesh make_sheet(const Vec3& corner, const Vec3& u, const Vec3& v, int nu, int nv) {
  if (nu < 1 || nv < 1) throw Error(ErrorCode::ShapeError, "make_sheet needs nu, nv >= 1");
  TriMesh m;
  for (int j = 0; j <= nv; ++j)
    for (int i = 0; i <= nu; ++i) m.vertices.push_back(corner + u * (double(i) / nu) + v * (double(j) / nv));
  auto id = [&](int i, int j) { return j * (nu + 1) + i; };
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

}  // namespace ndc::data
