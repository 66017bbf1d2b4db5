#include "ndc/isosurf.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/SVD>

namespace ndc {

namespace {
#include "mc_tables.inc"

bool finite(const Vec3& v) { return v.allFinite(); }

Vec3 origin_of(const Index3& cell) { return Vec3(cell[0], cell[1], cell[2]); }

}  // namespace

double qef_objective(std::span<const PlaneConstraint> constraints, const Vec3& x) {
  double e = 0.0;
  for (const auto& c : constraints) {
    const double r = c.normal.dot(x - c.point);
    e += r * r;
  }
  return e;
}

QefSolution qef_solve_detailed(std::span<const PlaneConstraint> constraints,
                               const CellBounds& bounds, double truncation) {
  if (constraints.empty()) throw Error(ErrorCode::NoConstraints, "qef_solve needs >= 1 plane");

  QefSolution out;
  Vec3 mass = Vec3::Zero();
  for (const auto& c : constraints) mass += c.point;
  mass /= static_cast<double>(constraints.size());
  out.mass_point = mass.cwiseMax(bounds.lo).cwiseMin(bounds.hi);

  const auto rows = static_cast<Eigen::Index>(constraints.size());
  Eigen::MatrixXd a(rows, 3);
  Eigen::VectorXd b(rows);
  bool ok = finite(mass);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& c = constraints[r];
    ok = ok && finite(c.normal) && finite(c.point);
    a.row(r) = c.normal.transpose();
    b[r] = c.normal.dot(c.point - mass);
  }
  if (!ok) {
    out.position = out.mass_point;
    out.fallback = true;
    return out;
  }

  // Solve A y = b about the mass point; x = mass + y.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = truncation * sigma[0];
  Vec3 y = Vec3::Zero();
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0) || sigma[i] < cutoff) continue;
    y += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / sigma[i]);
    ++out.rank;
  }
  const Vec3 x = mass + y;
  if (!finite(x)) {
    out.position = out.mass_point;
    out.fallback = true;
    return out;
  }

  const Vec3 clamped = x.cwiseMax(bounds.lo).cwiseMin(bounds.hi);
  out.position = clamped;
  if (clamped != x &&
      qef_objective(constraints, clamped) > qef_objective(constraints, out.mass_point))
    out.position = out.mass_point;
  return out;
}

Vec3 qef_solve(std::span<const PlaneConstraint> constraints, const CellBounds& bounds) {
  return qef_solve_detailed(constraints, bounds).position;
}

namespace {

Vec3 numeric_gradient(const std::function<double(const Vec3&)>& f, const Vec3& p) {
  constexpr double h = 1e-6;
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 lo = p, hi = p;
    lo[a] -= h;
    hi[a] += h;
    g[a] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

Vec3 unit_or_x(const Vec3& v) {
  const double len = v.norm();
  return len > 0.0 && std::isfinite(len) ? Vec3(v / len) : Vec3(Vec3::UnitX());
}

}  // namespace

EdgeHermite hermite_from_grid(const ScalarGrid& grid, const NormalSource& source) {
  const SignGrid signs = signs_from_scalar(grid);
  const GridDims& d = grid.dims;
  EdgeHermite h{xor_flags(signs), EdgeField<double>(d, 0.0), EdgeField<Vec3>(d, Vec3::Zero())};
  const auto crossings = edge_crossings_linear(grid);

  if (std::holds_alternative<EstimatedNormals>(source)) {
    const GradientField grads = central_gradients(grid);
    h.normals = interpolate_edge_normals(crossings, grads.gradients);
    for (int a = 0; a < 3; ++a)
      for (std::size_t e = 0; e < crossings.axes[a].size(); ++e)
        if (crossings.axes[a][e]) h.t.axes[a][e] = *crossings.axes[a][e];
    return h;
  }

  const ExactField& field = std::get<ExactField>(source);
  for (int a = 0; a < 3; ++a) {
    const Index3 step = axis_step(a);
    for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
      const auto& linear = crossings.at(a, i, j, l);
      if (!linear) return;
      const Vec3 p0(i, j, l);
      const Vec3 dir(step[0], step[1], step[2]);
      double t = *linear;
      double lo = 0.0, hi = 1.0;
      const bool lo_inside = field.sdf(p0) < 0.0;
      if (lo_inside != (field.sdf(p0 + dir) < 0.0)) {
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((field.sdf(p0 + mid * dir) < 0.0) == lo_inside)
            lo = mid;
          else
            hi = mid;
        }
        t = 0.5 * (lo + hi);
      }
      const Vec3 x = p0 + t * dir;
      const Vec3 g = field.gradient ? field.gradient(x) : numeric_gradient(field.sdf, x);
      h.t.at(a, i, j, l) = t;
      h.normals.at(a, i, j, l) = unit_or_x(g);
    });
  }
  return h;
}

CellVertices qef_cell_vertices(const EdgeHermite& hermite) {
  const GridDims& d = hermite.flags.dims;
  CellVertices out{VertexOffsetGrid(d, Vec3::Constant(0.5)), CellField<std::uint8_t>(d, 0), 0};
  std::vector<PlaneConstraint> planes;
  planes.reserve(12);
  for_each_index(d.cell_shape(), [&](int i, int j, int l) {
    planes.clear();
    for (const CellEdge& ce : cell_edges()) {
      const int ei = i + ce.vertex[0], ej = j + ce.vertex[1], el = l + ce.vertex[2];
      if (!hermite.flags.at(ce.axis, ei, ej, el)) continue;
      Vec3 p(ei, ej, el);
      p[ce.axis] += hermite.t.at(ce.axis, ei, ej, el);
      planes.push_back({p, hermite.normals.at(ce.axis, ei, ej, el)});
    }
    if (planes.empty()) return;
    const Index3 cell{i, j, l};
    const QefSolution s = qef_solve_detailed(planes, CellBounds::unit_cell(cell));
    if (s.fallback) ++out.fallbacks;
    out.offsets.at(i, j, l) = (s.position - origin_of(cell)).cwiseMax(0.0).cwiseMin(1.0);
    out.active.at(i, j, l) = 1;
  });
  return out;
}

QuadMesh build_dual_mesh(const FlagField& faces, const SignGrid* signs,
                         const VertexOffsetGrid& offsets) {
  const GridDims& d = faces.dims;
  if (offsets.dims != d || (signs && signs->dims != d))
    throw Error(ErrorCode::ShapeError, "dual mesh inputs have inconsistent dims");

  QuadMesh mesh;
  CellField<int> ids(d, -1);
  for_each_index(d.cell_shape(), [&](int i, int j, int l) {
    for (const CellEdge& ce : cell_edges()) {
      if (faces.at(ce.axis, i + ce.vertex[0], j + ce.vertex[1], l + ce.vertex[2])) {
        ids.at(i, j, l) = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(origin_of({i, j, l}) + offsets.at(i, j, l));
        return;
      }
    }
  });

  for (int a = 0; a < 3; ++a) {
    for_each_index(d.edge_shape(a), [&](int i, int j, int l) {
      if (!faces.at(a, i, j, l) || !is_interior_edge(d, a, i, j, l)) return;
      const auto cells = cells_around_edge(a, i, j, l);
      std::array<int, 4> q{};
      for (int c = 0; c < 4; ++c) q[c] = ids.at(cells[c][0], cells[c][1], cells[c][2]);
      if (signs && !signs->at(i, j, l)) std::swap(q[1], q[3]);
      mesh.quads.push_back(q);
    });
  }
  return mesh;
}

QuadMesh dc_extract(const ScalarGrid& grid, const NormalSource& source) {
  const SignGrid signs = signs_from_scalar(grid);
  const EdgeHermite hermite = hermite_from_grid(grid, source);
  const CellVertices cells = qef_cell_vertices(hermite);
  return build_dual_mesh(hermite.flags, &signs, cells.offsets);
}

namespace {

constexpr int kMcCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                 {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kMcEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

TriMesh mc_extract(const ScalarGrid& grid) {
  const auto crossings = edge_crossings_linear(grid);
  const GridDims& d = grid.dims;
  TriMesh mesh;
  // Shared vertex per crossing edge, keyed by (axis, edge index).
  std::array<std::vector<int>, 3> edge_vertex;
  for (int a = 0; a < 3; ++a) edge_vertex[a].assign(d.edge_count(a), -1);

  auto vertex_on = [&](int i, int j, int l, int mc_edge) {
    const int* c0 = kMcCorner[kMcEdge[mc_edge][0]];
    const int* c1 = kMcCorner[kMcEdge[mc_edge][1]];
    int axis = 0;
    while (c0[axis] == c1[axis]) ++axis;
    const int li = i + std::min(c0[0], c1[0]);
    const int lj = j + std::min(c0[1], c1[1]);
    const int ll = l + std::min(c0[2], c1[2]);
    int& id = edge_vertex[axis][d.edge_index(axis, li, lj, ll)];
    if (id < 0) {
      Vec3 p(li, lj, ll);
      p[axis] += *crossings.at(axis, li, lj, ll);
      id = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(p);
    }
    return id;
  };

  for_each_index(d.cell_shape(), [&](int i, int j, int l) {
    int config = 0;
    for (int c = 0; c < 8; ++c)
      if (grid.at(i + kMcCorner[c][0], j + kMcCorner[c][1], l + kMcCorner[c][2]) < 0.0)
        config |= 1 << c;
    const int* row = kTriTable[config];
    for (int t = 0; row[t] >= 0; t += 3) {
      // The table winds triangles clockwise about the outward normal.
      mesh.triangles.push_back({vertex_on(i, j, l, row[t]), vertex_on(i, j, l, row[t + 2]),
                                vertex_on(i, j, l, row[t + 1])});
    }
  });
  return mesh;
}

TriMesh triangulate_fixed(const QuadMesh& mesh) {
  TriMesh out{mesh.vertices, {}};
  out.triangles.reserve(mesh.quads.size() * 2);
  for (const auto& q : mesh.quads) {
    out.triangles.push_back({q[0], q[1], q[2]});
    out.triangles.push_back({q[0], q[2], q[3]});
  }
  return out;
}

}  // namespace ndc
