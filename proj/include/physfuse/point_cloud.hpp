#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace physfuse {

using Vec3 = std::array<double, 3>;

/// One Gaussian splat center. An empty segment_id marks an unlabeled point.
struct SplatPoint {
  Vec3 position{};
  Vec3 scale{1.0, 1.0, 1.0};  // per-axis standard deviations, meters
  double opacity = 1.0;
  std::string segment_id;

  friend bool operator==(const SplatPoint&, const SplatPoint&) = default;
};

/// How PLY scale/opacity columns are stored. `linear` holds meters and [0,1]
/// directly; `gaussian_splatting` holds log-scales and opacity logits as
/// written by common 3DGS trainers.
enum class SplatEncoding { linear, gaussian_splatting };

struct PointCloud {
  std::vector<SplatPoint> points;
  std::vector<std::string> warnings;
};

/// Reads `ply` (ascii or binary_little_endian) with vertex properties
/// x, y, z, scale_0..2, opacity, segment_id. Negative segment ids mean
/// unlabeled. Rotation columns are ignored with a warning.
PointCloud read_ply(std::istream& in, SplatEncoding encoding = SplatEncoding::linear);

/// JSON fallback: {"points":[{"position":[..],"scale":[..],"opacity":..,
/// "segment_id":..}]}.
PointCloud read_point_cloud_json(std::istream& in);

/// Dispatches on the extension (.ply or .json). Throws IoError/ValidationError.
PointCloud load_point_cloud(const std::string& path, SplatEncoding encoding = SplatEncoding::linear);

/// Writes linear-encoded PLY. Segment ids must be integers or empty.
void write_ply(std::ostream& out, const std::vector<SplatPoint>& points, bool binary = true);

void write_point_cloud_json(std::ostream& out, const std::vector<SplatPoint>& points);

}  // namespace physfuse
