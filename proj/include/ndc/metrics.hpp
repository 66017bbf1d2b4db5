#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ndc/mesh.hpp"
#include "ndc/mesher.hpp"

namespace ndc::metrics {

struct SampledSurface {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit face normals
  std::vector<int> faces;
};

/// Area-weighted uniform samples; EmptyMesh when the mesh has no area.
SampledSurface sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

/// Squared distance from each query to its nearest target, and the target
/// index (ties to the smaller index).
void nearest_neighbors(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets,
                       std::vector<double>& sq_dist, std::vector<int>& index);

struct ChamferF1 {
  double cd = 0.0;  // mean squared NN distance A->B plus B->A
  double f1 = 0.0;
  double precision = 0.0;  // fraction of B within tau of A
  double recall = 0.0;     // fraction of A within tau of B
};

/// A is the reference, B the prediction. f1 is 0 when precision + recall is 0.
ChamferF1 chamfer_f1(const SampledSurface& a, const SampledSurface& b, double tau);

inline constexpr std::array<double, 3> kInaccurateNormalDegrees = {5.0, 30.0, 80.0};
inline constexpr std::array<double, 3> kSmallAngleDegrees = {10.0, 20.0, 30.0};

/// Unsigned angle in degrees between unoriented directions.
double unoriented_angle_deg(const Vec3& a, const Vec3& b);

struct NormalConsistency {
  double nc = 0.0;
  std::array<double, 3> in_gt{};    // % of A samples whose NN in B is off by > threshold
  std::array<double, 3> in_pred{};  // % of B samples whose NN in A is off by > threshold
};

NormalConsistency normal_consistency(const SampledSurface& a, const SampledSurface& b);

struct EdgeParams {
  double radius = 0.01;
  double angle_deg = 30.0;
};

/// Samples with some other sample within `radius` whose normal differs by
/// more than `angle_deg`.
std::vector<int> edge_samples(const SampledSurface& s, const EdgeParams& params);
SampledSurface subset(const SampledSurface& s, const std::vector<int>& keep);

struct EdgeMetrics {
  static constexpr double kMissing = std::numeric_limits<double>::max();
  double ecd = kMissing;  // kMissing when either edge set is empty
  double ef1 = 0.0;
  std::size_t edges_a = 0, edges_b = 0;
};

EdgeMetrics edge_metrics(const SampledSurface& a, const SampledSurface& b, const EdgeParams& params, double tau);

struct SmallAngles {
  std::array<double, 3> pct{};  // % of interior angles below each threshold
  std::size_t angles = 0;
  std::size_t degenerate_triangles = 0;  // counted as three 0 degree angles
};

/// EmptyMesh on a mesh without triangles.
SmallAngles small_angles(const TriMesh& mesh);

struct EvalOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double tau_fraction = 0.003;         // x GT bbox diagonal after normalization
  double edge_radius_fraction = 0.01;  // x GT bbox diagonal
  double edge_angle_deg = 30.0;
};

struct MetricsReport {
  double cd = 0.0, f1 = 0.0, nc = 0.0, ecd = EdgeMetrics::kMissing, ef1 = 0.0;
  std::array<double, 3> in_gt{}, in_pred{};
  std::array<double, 3> sa{};
  std::size_t v_count = 0, t_count = 0;
  EdgeTopologyStats topology;
  // Parameters the numbers depend on.
  double tau = 0.0, edge_radius = 0.0, edge_angle_deg = 0.0, scale = 1.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Both meshes are mapped by the similarity that puts the GT bounding box's
/// longest side into [0, 1] at the origin, then sampled with the same seed.
/// Counts, angles and topology describe the prediction.
MetricsReport evaluate(const TriMesh& gt, const TriMesh& pred, const EvalOptions& options = {});

std::string to_key_value(const MetricsReport& r);
std::string csv_header();
std::string csv_row(const std::string& label, const MetricsReport& r);

}  // namespace ndc::metrics
