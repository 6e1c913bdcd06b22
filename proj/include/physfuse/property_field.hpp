#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "physfuse/nig.hpp"
#include "physfuse/point_cloud.hpp"
#include "physfuse/session.hpp"

namespace physfuse {

struct PointQuery {
  double mmse = 0.0;  // mixture mean
  UncertaintyReport uncertainty;
  std::size_t map_class = 0;
  std::string map_material;
  double map_material_mmse = 0.0;  // component mean of the MAP class
};

/// Per-segment property summary cached by the field.
struct SegmentSummary {
  double mmse = 0.0;
  double total_uncertainty = 0.0;
};

struct Aabb {
  Vec3 min{};
  Vec3 max{};
};

/// Splat centers with the fused beliefs of their segments. Points whose
/// segment has no belief are unlabeled and excluded from aggregates.
class SemanticPointField {
 public:
  SemanticPointField(std::vector<SplatPoint> points, const FusionSession& session);

  [[nodiscard]] const std::vector<SplatPoint>& points() const { return points_; }
  [[nodiscard]] const MaterialLibrary& library() const { return session_.library(); }
  [[nodiscard]] const FusionSession& session() const { return session_; }
  [[nodiscard]] std::size_t unlabeled_count() const { return unlabeled_; }
  [[nodiscard]] bool labeled(std::size_t point_index) const;
  /// Bounds of the point centers. Undefined for an empty field.
  [[nodiscard]] const Aabb& bounds() const { return bounds_; }

  /// Throws ValidationError for an out-of-range index or an unlabeled point.
  [[nodiscard]] PointQuery query_point(std::size_t point_index, const std::string& property) const;

  [[nodiscard]] SegmentSummary segment_summary(const std::string& segment_id, const std::string& property) const;

 private:
  std::vector<SplatPoint> points_;
  FusionSession session_;
  Aabb bounds_;
  std::size_t unlabeled_ = 0;
};

struct VoxelCell {
  std::array<std::int64_t, 3> index{};
  double mmse = 0.0;
  double total_uncertainty = 0.0;  // variance, squared property units
  std::string segment_id;          // segment with the strongest influence
};

/// Sparse occupancy grid; only occupied cells are stored.
struct VoxelGrid {
  Vec3 origin{};
  double voxel_edge = 0.0;
  std::array<std::int64_t, 3> dims{};
  std::string property;
  std::string units;
  double occupancy_threshold = 0.0;
  std::vector<VoxelCell> cells;

  [[nodiscard]] std::int64_t total_voxels() const { return dims[0] * dims[1] * dims[2]; }
  [[nodiscard]] Vec3 center(const std::array<std::int64_t, 3>& idx) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct VoxelizeOptions {
  /// Empty means max extent of the point bounds / 64.
  std::optional<double> voxel_edge;
  double occupancy_threshold = 0.05;
};

/// A voxel is occupied when some labeled splat's influence
///   opacity * exp(-0.5 * d^2),  d = Mahalanobis distance under diag(scale^2)
/// at the voxel center exceeds the threshold. Occupied cells carry the
/// influence-weighted average of the contributing splats' segment estimates.
VoxelGrid voxelize(const SemanticPointField& field, const std::string& property,
                   const VoxelizeOptions& options = {});

struct MassEstimate {
  double mass_kg = 0.0;
  double variance_kg2 = 0.0;
  std::size_t occupied_voxels = 0;
};

/// Sums density * edge^3 over occupied voxels. Standard deviations add within
/// a segment (perfect correlation); segment variances add. Throws
/// ValidationError unless the grid holds density.
MassEstimate integrate_mass(const VoxelGrid& grid);

struct ColoredPoint {
  Vec3 position{};
  Rgb color;
  bool labeled = false;
};

/// Color reserved for unlabeled points.
inline constexpr Rgb kUnlabeledColor{255, 0, 255};

std::vector<ColoredPoint> export_material_map(const SemanticPointField& field);

}  // namespace physfuse
