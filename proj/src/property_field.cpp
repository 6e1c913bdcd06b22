#include "physfuse/property_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "physfuse/error.hpp"

namespace physfuse {

SemanticPointField::SemanticPointField(std::vector<SplatPoint> points, const FusionSession& session)
    : points_(std::move(points)), session_(session) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  bounds_.min = {inf, inf, inf};
  bounds_.max = {-inf, -inf, -inf};
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!labeled(i)) ++unlabeled_;
    for (std::size_t k = 0; k < 3; ++k) {
      bounds_.min[k] = std::min(bounds_.min[k], points_[i].position[k]);
      bounds_.max[k] = std::max(bounds_.max[k], points_[i].position[k]);
    }
  }
}

bool SemanticPointField::labeled(std::size_t point_index) const {
  const auto& id = points_.at(point_index).segment_id;
  return !id.empty() && session_.find_segment(id) != nullptr;
}

PointQuery SemanticPointField::query_point(std::size_t point_index, const std::string& property) const {
  if (point_index >= points_.size())
    throw ValidationError("point index " + std::to_string(point_index) + " out of range");
  if (!labeled(point_index))
    throw ValidationError("point " + std::to_string(point_index) + " is unlabeled");
  const SegmentState& seg = *session_.find_segment(points_[point_index].segment_id);
  const MixturePredictive mx = session_.mixture(seg, property);
  PointQuery q;
  q.mmse = mixture_mmse(mx);
  q.uncertainty = session_.uncertainty(seg, property);
  q.map_class = seg.classes.map_class();
  q.map_material = library().classes()[q.map_class];
  q.map_material_mmse = mx.components[q.map_class].mu;
  return q;
}

SegmentSummary SemanticPointField::segment_summary(const std::string& segment_id,
                                                   const std::string& property) const {
  const SegmentState* seg = session_.find_segment(segment_id);
  if (seg == nullptr) throw ValidationError("no belief for segment '" + segment_id + "'");
  return {mixture_mmse(session_.mixture(*seg, property)), session_.uncertainty(*seg, property).total};
}

Vec3 VoxelGrid::center(const std::array<std::int64_t, 3>& idx) const {
  Vec3 c{};
  for (std::size_t k = 0; k < 3; ++k) c[k] = origin[k] + (static_cast<double>(idx[k]) + 0.5) * voxel_edge;
  return c;
}

nlohmann::json VoxelGrid::to_json() const {
  nlohmann::json occupied = nlohmann::json::array();
  nlohmann::json mmse = nlohmann::json::array();
  nlohmann::json unc = nlohmann::json::array();
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& c : cells) {
    occupied.push_back(c.index);
    mmse.push_back(c.mmse);
    unc.push_back(c.total_uncertainty);
    segs.push_back(c.segment_id);
  }
  return {{"origin", origin},
          {"edge", voxel_edge},
          {"dims", dims},
          {"property", property},
          {"units", units},
          {"occupancy_threshold", occupancy_threshold},
          {"occupied", std::move(occupied)},
          {"mmse", std::move(mmse)},
          {"total_uncertainty", std::move(unc)},
          {"segment_id", std::move(segs)}};
}

VoxelGrid voxelize(const SemanticPointField& field, const std::string& property, const VoxelizeOptions& options) {
  if (field.points().empty()) throw ValidationError("cannot voxelize an empty point field");
  const PropertyKind* kind = field.library().property(property);
  if (kind == nullptr) throw ValidationError("unknown property '" + property + "'");
  const double theta = options.occupancy_threshold;
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("occupancy threshold must lie in (0,1)");

  const Aabb& b = field.bounds();
  double edge = 0.0;
  if (options.voxel_edge) {
    edge = *options.voxel_edge;
  } else {
    double extent = 0.0;
    for (std::size_t k = 0; k < 3; ++k) extent = std::max(extent, b.max[k] - b.min[k]);
    if (extent == 0.0)
      for (const auto& p : field.points()) extent = std::max({extent, 6 * p.scale[0], 6 * p.scale[1], 6 * p.scale[2]});
    edge = extent / 64.0;
  }
  if (!(edge > 0.0) || !std::isfinite(edge)) throw ValidationError("voxel edge must be positive");

  // Splats that can reach the threshold, with their per-axis reach.
  struct Contributor {
    std::size_t point;
    std::size_t segment;
    Vec3 reach;
  };
  std::vector<Contributor> contributors;
  std::vector<std::string> segment_ids;
  std::vector<SegmentSummary> summaries;
  std::unordered_map<std::string, std::size_t> segment_index;
  for (std::size_t i = 0; i < field.points().size(); ++i) {
    const auto& p = field.points()[i];
    if (!field.labeled(i) || !(p.opacity > theta)) continue;
    auto [it, inserted] = segment_index.try_emplace(p.segment_id, segment_ids.size());
    if (inserted) {
      segment_ids.push_back(p.segment_id);
      summaries.push_back(field.segment_summary(p.segment_id, property));
    }
    const double r = std::sqrt(2.0 * std::log(p.opacity / theta));
    contributors.push_back({i, it->second, {p.scale[0] * r, p.scale[1] * r, p.scale[2] * r}});
  }

  VoxelGrid grid;
  grid.voxel_edge = edge;
  grid.property = property;
  grid.units = kind->units;
  grid.occupancy_threshold = theta;
  Vec3 lo = b.min, hi = b.max;
  if (!contributors.empty()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    lo = {inf, inf, inf};
    hi = {-inf, -inf, -inf};
    for (const auto& c : contributors) {
      const auto& pos = field.points()[c.point].position;
      for (std::size_t k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], pos[k] - c.reach[k]);
        hi[k] = std::max(hi[k], pos[k] + c.reach[k]);
      }
    }
  }
  grid.origin = lo;
  double total = 1.0;
  for (std::size_t k = 0; k < 3; ++k) {
    grid.dims[k] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi[k] - lo[k]) / edge)));
    total *= static_cast<double>(grid.dims[k]);
  }
  if (total > 1e12) throw ValidationError("voxel grid too large; increase the voxel edge");

  struct Accum {
    double weight = 0.0;
    double mmse = 0.0;
    double uncertainty = 0.0;
    double best = 0.0;
    std::size_t best_segment = 0;
  };
  std::unordered_map<std::int64_t, Accum> acc;
  const auto key = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    return (i * grid.dims[1] + j) * grid.dims[2] + k;
  };

  for (const auto& c : contributors) {
    const SplatPoint& p = field.points()[c.point];
    std::array<std::int64_t, 3> first{}, last{};
    for (std::size_t k = 0; k < 3; ++k) {
      const double a = (p.position[k] - c.reach[k] - grid.origin[k]) / edge - 0.5;
      const double z = (p.position[k] + c.reach[k] - grid.origin[k]) / edge - 0.5;
      first[k] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(a)));
      last[k] = std::min<std::int64_t>(grid.dims[k] - 1, static_cast<std::int64_t>(std::ceil(z)));
    }
    const SegmentSummary& s = summaries[c.segment];
    for (std::int64_t i = first[0]; i <= last[0]; ++i) {
      const double dx = (grid.origin[0] + (static_cast<double>(i) + 0.5) * edge - p.position[0]) / p.scale[0];
      for (std::int64_t j = first[1]; j <= last[1]; ++j) {
        const double dy = (grid.origin[1] + (static_cast<double>(j) + 0.5) * edge - p.position[1]) / p.scale[1];
        for (std::int64_t k = first[2]; k <= last[2]; ++k) {
          const double dz = (grid.origin[2] + (static_cast<double>(k) + 0.5) * edge - p.position[2]) / p.scale[2];
          const double influence = p.opacity * std::exp(-0.5 * (dx * dx + dy * dy + dz * dz));
          if (!(influence > theta)) continue;
          Accum& a = acc[key(i, j, k)];
          a.weight += influence;
          a.mmse += influence * s.mmse;
          a.uncertainty += influence * s.total_uncertainty;
          if (influence > a.best) {
            a.best = influence;
            a.best_segment = c.segment;
          }
        }
      }
    }
  }

  std::vector<std::pair<std::int64_t, Accum>> sorted(acc.begin(), acc.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  grid.cells.reserve(sorted.size());
  for (const auto& [k, a] : sorted) {
    VoxelCell cell;
    cell.index = {k / (grid.dims[1] * grid.dims[2]), (k / grid.dims[2]) % grid.dims[1], k % grid.dims[2]};
    cell.mmse = a.mmse / a.weight;
    cell.total_uncertainty = a.uncertainty / a.weight;
    cell.segment_id = segment_ids[a.best_segment];
    grid.cells.push_back(std::move(cell));
  }
  return grid;
}

MassEstimate integrate_mass(const VoxelGrid& grid) {
  if (grid.property != "density")
    throw ValidationError("mass integration needs a density grid, got '" + grid.property + "'");
  const double volume = grid.voxel_edge * grid.voxel_edge * grid.voxel_edge;
  MassEstimate out;
  std::map<std::string, double> sd_by_segment;
  for (const auto& c : grid.cells) {
    out.mass_kg += c.mmse * volume;
    sd_by_segment[c.segment_id] += volume * std::sqrt(c.total_uncertainty);
  }
  for (const auto& [_, sd] : sd_by_segment) out.variance_kg2 += sd * sd;
  out.occupied_voxels = grid.cells.size();
  return out;
}

std::vector<ColoredPoint> export_material_map(const SemanticPointField& field) {
  std::vector<ColoredPoint> out;
  out.reserve(field.points().size());
  for (std::size_t i = 0; i < field.points().size(); ++i) {
    ColoredPoint cp;
    cp.position = field.points()[i].position;
    if (field.labeled(i)) {
      const SegmentState* seg = field.session().find_segment(field.points()[i].segment_id);
      cp.color = field.library().color(seg->classes.map_class());
      cp.labeled = true;
    } else {
      cp.color = kUnlabeledColor;
    }
    out.push_back(cp);
  }
  return out;
}

}  // namespace physfuse
