#pragma once

#include <span>

#include "physfuse/core_types.hpp"

namespace physfuse {

/// Predictive variance split, in squared property units.
struct UncertaintyReport {
  double aleatoric = 0.0;  // E[sigma^2]
  double epistemic = 0.0;  // Var[mu]; for mixtures this includes between_class
  double total = 0.0;      // aleatoric + epistemic
  /// Class-ambiguity spread sum w mu^2 - (sum w mu)^2. Zero for a single class.
  double between_class = 0.0;
};

struct WeightedValue {
  double psi;
  double p;
};

/// Normal-Inverse-Gamma belief over (mu, sigma^2) of one property for one
/// material.
class NigBelief {
 public:
  /// Throws ValidationError naming the violated parameter.
  NigBelief(double tau, double kappa, double alpha, double beta);
  explicit NigBelief(const NigPrior& prior)
      : NigBelief(prior.tau, prior.kappa, prior.alpha, prior.beta) {}

  /// Confidence-weighted conjugate update:
  ///   kappa' = kappa + p
  ///   tau'   = (kappa*tau + p*psi) / (kappa + p)
  ///   alpha' = alpha + p/2
  ///   beta'  = beta + p*kappa*(psi - tau)^2 / (2*(kappa + p))
  [[nodiscard]] NigBelief absorb(double psi, Confidence p) const;

  /// Left-to-right fold of absorb(). Confidences are validated.
  [[nodiscard]] NigBelief absorb_batch(std::span<const WeightedValue> obs) const;

  /// aleatoric = beta/(alpha-1), epistemic = aleatoric/kappa.
  [[nodiscard]] UncertaintyReport predictive_uncertainty() const;

  /// Posterior mean location.
  [[nodiscard]] double mmse() const { return tau_; }

  [[nodiscard]] double tau() const { return tau_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double beta() const { return beta_; }

  friend bool operator==(const NigBelief&, const NigBelief&) = default;

 private:
  double tau_;
  double kappa_;
  double alpha_;
  double beta_;
};

}  // namespace physfuse
