#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace physfuse {

/// Admissible values of a property. Both ends are closed; an infinite upper
/// bound makes the interval half-open.
struct Support {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool contains(double v) const { return v >= lower && v <= upper; }
};

struct PropertyKind {
  std::string name;
  std::string units;
  Support support;
  /// Variance floor for the moments posterior, in squared property units.
  double epsilon = 1e-12;
};

/// Normal-Inverse-Gamma hyperparameters for one (material, property) pair.
struct NigPrior {
  double tau = 0.0;
  double kappa = 1e-3;
  double alpha = 2.0;
  double beta = 1.0;

  friend bool operator==(const NigPrior&, const NigPrior&) = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Default weak prior built from a nominal value: the prior aleatoric standard
/// deviation is 10% of |nominal|.
NigPrior default_prior(double nominal, double epsilon);

/// Built-in property kinds used when a library omits `properties`.
std::optional<PropertyKind> builtin_property(std::string_view name);

/// Ordered set of material classes with per-class property priors. Index i
/// always refers to classes()[i].
class MaterialLibrary {
 public:
  MaterialLibrary(std::vector<std::string> classes,
                  std::vector<PropertyKind> properties,
                  std::map<std::pair<std::size_t, std::string>, NigPrior> priors,
                  std::vector<Rgb> colors = {});

  static MaterialLibrary from_json(const nlohmann::json& j);
  static MaterialLibrary load(const std::string& path);
  [[nodiscard]] nlohmann::json to_json() const;

  [[nodiscard]] std::size_t size() const { return classes_.size(); }
  [[nodiscard]] const std::vector<std::string>& classes() const { return classes_; }
  [[nodiscard]] const std::vector<PropertyKind>& properties() const { return properties_; }
  [[nodiscard]] const std::vector<Rgb>& colors() const { return colors_; }

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view material) const;
  [[nodiscard]] const PropertyKind* property(std::string_view name) const;
  [[nodiscard]] const NigPrior& prior(std::size_t class_index, const std::string& property) const;
  [[nodiscard]] Rgb color(std::size_t class_index) const { return colors_.at(class_index); }

  friend bool operator==(const MaterialLibrary&, const MaterialLibrary&);

 private:
  std::vector<std::string> classes_;
  std::vector<PropertyKind> properties_;
  std::map<std::pair<std::size_t, std::string>, NigPrior> priors_;
  std::vector<Rgb> colors_;
};

/// A confidence score in [0, 1].
class Confidence {
 public:
  explicit Confidence(double value);
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  double value_;
};

/// One material candidate for one segment seen in one view. The confidence is
/// kept raw so that validation can report it; updates take a Confidence.
struct Observation {
  std::string segment_id;
  std::string view_id;
  std::size_t class_index = 0;
  double confidence = 0.0;
  std::map<std::string, double> properties;
  std::optional<std::string> caption;

  friend bool operator==(const Observation&, const Observation&) = default;
};

enum class ViolationKind { confidence_range, unknown_class, property_support, non_finite };

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] std::size_t count(ViolationKind kind) const;
  [[nodiscard]] std::string summary() const;
};

/// Lists every violated invariant; never throws. Properties the library does
/// not know are not violations (fusion ignores them).
ValidationReport validate_observation(const Observation& obs, const MaterialLibrary& lib);

nlohmann::json to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

}  // namespace physfuse
