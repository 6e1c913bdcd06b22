#include "physfuse/nig.hpp"

#include <cmath>

#include "physfuse/error.hpp"

namespace physfuse {

NigBelief::NigBelief(double tau, double kappa, double alpha, double beta)
    : tau_(tau), kappa_(kappa), alpha_(alpha), beta_(beta) {
  if (!std::isfinite(tau)) throw ValidationError("NIG tau must be finite");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("NIG kappa must be > 0");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw ValidationError("NIG alpha must exceed 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("NIG beta must be > 0");
}

NigBelief NigBelief::absorb(double psi, Confidence p) const {
  if (!std::isfinite(psi)) throw ValidationError("property value must be finite");
  NigBelief next = *this;
  const double w = p.value();
  if (w == 0.0) return next;
  const double kappa_new = kappa_ + w;
  const double diff = psi - tau_;
  next.tau_ = (kappa_ * tau_ + w * psi) / kappa_new;
  next.kappa_ = kappa_new;
  next.alpha_ = alpha_ + 0.5 * w;
  next.beta_ = beta_ + w * kappa_ * diff * diff / (2.0 * kappa_new);
  return next;
}

NigBelief NigBelief::absorb_batch(std::span<const WeightedValue> obs) const {
  NigBelief b = *this;
  for (const auto& o : obs) b = b.absorb(o.psi, Confidence(o.p));
  return b;
}

UncertaintyReport NigBelief::predictive_uncertainty() const {
  if (!(alpha_ > 1.0)) throw DomainError("NIG moments undefined for alpha <= 1");
  UncertaintyReport r;
  r.aleatoric = beta_ / (alpha_ - 1.0);
  r.epistemic = r.aleatoric / kappa_;
  r.total = r.aleatoric + r.epistemic;
  return r;
}

}  // namespace physfuse
