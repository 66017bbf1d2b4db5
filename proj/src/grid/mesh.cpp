#include <cmath>
#include <random>

#include "ndc/mesh.hpp"

namespace ndc {

SurfaceSamples sample_triangles(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  std::vector<double> areas;
  areas.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const double a = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    areas.push_back(std::isfinite(a) ? a : 0.0);
    total += areas.back();
  }
  SurfaceSamples out;
  if (!(total > 0.0)) return out;
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  out.points.reserve(n);
  out.triangles.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const int ti = pick(rng);
    const auto& t = mesh.triangles[ti];
    const double r1 = std::sqrt(u(rng)), r2 = u(rng);
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    out.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    out.triangles.push_back(ti);
  }
  return out;
}

}  // namespace ndc
