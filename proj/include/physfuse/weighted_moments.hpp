#pragma once

#include "physfuse/core_types.hpp"

namespace physfuse {

struct GaussianPosterior {
  double mu = 0.0;
  double sigma2 = 1.0;
};

/// Confidence-weighted raw-sum accumulators W = sum p, S = sum p*psi,
/// Q = sum p*psi^2.
///
/// Raw sums merge trivially but lose precision when |mean| >> spread (the
/// Q/W - mu^2 difference cancels). At property scales seen in practice
/// (densities up to ~2e4 kg/m^3 with percent-level spread) the error stays far
/// below the variance floor's influence; see the oracle tests.
class WeightedMoments {
 public:
  explicit WeightedMoments(double epsilon = 1e-12);

  static WeightedMoments from_parts(double w, double s, double q, double epsilon);

  /// Throws ValidationError for non-finite psi. Zero confidence is a no-op.
  [[nodiscard]] WeightedMoments accumulate(double psi, Confidence p) const;

  /// mu = S/W, sigma2 = max(Q/W - mu^2, epsilon). Throws NoEvidenceError when W == 0.
  [[nodiscard]] GaussianPosterior posterior_mean_var() const;
  [[nodiscard]] GaussianPosterior gaussian_posterior() const { return posterior_mean_var(); }

  [[nodiscard]] double weight() const { return w_; }
  [[nodiscard]] double first() const { return s_; }
  [[nodiscard]] double second() const { return q_; }
  [[nodiscard]] double epsilon() const { return epsilon_; }
  [[nodiscard]] bool empty() const { return w_ == 0.0; }

  friend bool operator==(const WeightedMoments&, const WeightedMoments&) = default;

 private:
  double w_ = 0.0;
  double s_ = 0.0;
  double q_ = 0.0;
  double epsilon_;
};

/// Componentwise sum. Throws ValidationError if the variance floors differ.
WeightedMoments merge(const WeightedMoments& a, const WeightedMoments& b);

}  // namespace physfuse
