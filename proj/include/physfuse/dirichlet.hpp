#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "physfuse/core_types.hpp"

namespace physfuse {

/// Dirichlet posterior over the K material classes of one segment.
///
/// Each absorbed observation adds lambda * confidence to the concentration of
/// its class. Values are persistent: absorb() returns a new belief and leaves
/// the receiver untouched, so per-view snapshots are free.
class DirichletBelief {
 public:
  /// Throws ValidationError naming the first nonpositive entry.
  DirichletBelief(std::vector<double> alpha0, double lambda);

  /// Uniform all-ones prior.
  static DirichletBelief uniform(std::size_t k, double lambda = 1.0);

  /// Rebuilds a belief from stored parameters (snapshot restore).
  static DirichletBelief from_parts(std::vector<double> prior, std::vector<double> alpha,
                                    double lambda, double total_weight);

  [[nodiscard]] DirichletBelief absorb(std::size_t class_index, Confidence confidence) const;

  /// Predictive class probabilities alpha_i / sum(alpha).
  [[nodiscard]] std::vector<double> class_posterior() const;

  /// Log density of the Dirichlet at a point on the open simplex.
  [[nodiscard]] double log_density(std::span<const double> theta) const;

  /// Argmax of class_posterior; ties go to the lowest index.
  [[nodiscard]] std::size_t map_class() const;

  [[nodiscard]] std::size_t size() const { return alpha_.size(); }
  [[nodiscard]] const std::vector<double>& alpha() const { return alpha_; }
  [[nodiscard]] const std::vector<double>& prior() const { return prior_; }
  [[nodiscard]] double lambda() const { return lambda_; }
  /// Running sum of lambda * confidence over absorbed observations.
  [[nodiscard]] double total_weight() const { return total_weight_; }

  friend bool operator==(const DirichletBelief&, const DirichletBelief&) = default;

 private:
  DirichletBelief() = default;

  std::vector<double> prior_;
  std::vector<double> alpha_;
  double lambda_ = 1.0;
  double total_weight_ = 0.0;
};

}  // namespace physfuse
