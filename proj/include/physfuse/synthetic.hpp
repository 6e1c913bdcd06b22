#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "physfuse/core_types.hpp"
#include "physfuse/observations_io.hpp"
#include "physfuse/point_cloud.hpp"
#include "physfuse/session.hpp"

namespace physfuse {

struct Box {
  Vec3 min{};
  Vec3 size{};
  [[nodiscard]] double volume() const { return size[0] * size[1] * size[2]; }
};

struct SegmentSpec {
  std::string id;
  std::optional<std::size_t> material;  // sampled from the class prior when empty
  Box box;
  std::map<std::string, double> values;  // pinned true property values
};

struct TruthParams {
  double mean = 0.0;
  double variance = 1.0;
};

/// fixed: class parameters come from `truths` (defaulting to the library
/// prior mean and prior aleatoric variance); nig: drawn from the library's
/// NIG priors.
enum class TruthMode { fixed, nig };

struct ConfidenceModel {
  enum class Kind { beta, constant };
  Kind kind = Kind::beta;
  double a = 8.0;
  double b = 2.0;
  double value = 1.0;
};

struct SceneSpec {
  MaterialLibrary library;
  std::vector<SegmentSpec> segments;
  /// Properties to simulate; empty means every library property.
  std::vector<std::string> properties;
  TruthMode truth_mode = TruthMode::fixed;
  std::map<std::pair<std::size_t, std::string>, TruthParams> truths;
  /// Row z: distribution of the reported class given true class z.
  std::vector<std::vector<double>> confusion;
  ConfidenceModel confidence;
  /// Concentration of the scene-level class frequencies.
  std::vector<double> class_alpha0;
  std::size_t views = 10;
  std::uint64_t seed = 0;
  double splat_spacing = 0.0;  // 0: smallest segment edge / 12
  double splat_scale = 0.4;    // splat std-dev as a fraction of spacing
  /// Occupancy threshold the splat lattice is fitted to.
  double splat_threshold = 0.05;

  explicit SceneSpec(MaterialLibrary lib);

  /// Identity with uniform off-diagonal leak eta.
  static std::vector<std::vector<double>> leaky_identity(std::size_t k, double eta);

  /// `base_dir` resolves a relative "library" path.
  static SceneSpec from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static SceneSpec load(const std::string& path);
  [[nodiscard]] nlohmann::json to_json() const;

  /// Throws ValidationError on any violated invariant.
  void validate() const;
  [[nodiscard]] std::vector<std::string> simulated_properties() const;
};

struct SegmentTruth {
  std::string id;
  std::size_t material = 0;
  Box box;
  std::map<std::string, double> values;
};

struct Scene {
  SceneSpec spec;
  std::vector<double> class_frequencies;
  std::map<std::pair<std::size_t, std::string>, TruthParams> class_params;
  std::vector<SegmentTruth> segments;

  /// Sum of true density times box volume.
  [[nodiscard]] double analytic_mass() const;
  /// Splats on a regular lattice filling each segment box. The lattice is
  /// inset so that the region where some splat's influence exceeds
  /// spec.splat_threshold has, on average, the box's faces.
  [[nodiscard]] std::vector<SplatPoint> splats() const;
  [[nodiscard]] nlohmann::json truth_json() const;
};

/// Deterministic given spec.seed.
Scene sample_scene(const SceneSpec& spec);

/// One line per (view, segment): reported class through the confusion matrix,
/// confidence from the confidence model, property values from the true class
/// normal (redrawn until inside the property support). Deterministic given
/// spec.seed and `views`. Throws ValidationError when views == 0.
std::vector<ObservationLine> emit_observations(const Scene& scene, std::size_t views);

/// Flattens lines into records the way the parser would.
std::vector<ObservationRecord> to_records(const std::vector<ObservationLine>& lines);

struct CoverageRow {
  double level = 0.0;
  std::size_t covered = 0;
  std::size_t cells = 0;
  [[nodiscard]] double coverage() const { return cells == 0 ? 0.0 : static_cast<double>(covered) / cells; }
};

struct CoverageTable {
  std::vector<CoverageRow> rows;
  std::size_t cells = 0;
  std::size_t prior_only_cells = 0;
  [[nodiscard]] bool prior_only() const { return cells > 0 && prior_only_cells == cells; }
};

/// Fraction of (segment, property) truths inside the central credible
/// interval of the session's mixture predictive, per nominal level.
CoverageTable calibration_score(const FusionSession& session, const Scene& scene,
                                const std::vector<double>& levels = {0.5, 0.9});

}  // namespace physfuse
