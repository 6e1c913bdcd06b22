#include "physfuse/weighted_moments.hpp"

#include <algorithm>
#include <cmath>

#include "physfuse/error.hpp"

namespace physfuse {

WeightedMoments::WeightedMoments(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ValidationError("variance floor epsilon must be positive and finite");
}

WeightedMoments WeightedMoments::from_parts(double w, double s, double q, double epsilon) {
  WeightedMoments m(epsilon);
  if (!(w >= 0.0) || !std::isfinite(w) || !std::isfinite(s) || !std::isfinite(q) || q < 0.0)
    throw ValidationError("invalid weighted-moment accumulators");
  if (w == 0.0 && (s != 0.0 || q != 0.0))
    throw ValidationError("weighted moments with zero weight must have zero sums");
  m.w_ = w;
  m.s_ = s;
  m.q_ = q;
  return m;
}

WeightedMoments WeightedMoments::accumulate(double psi, Confidence p) const {
  if (!std::isfinite(psi)) throw ValidationError("property value must be finite");
  WeightedMoments next = *this;
  if (p.value() == 0.0) return next;
  next.w_ += p.value();
  next.s_ += p.value() * psi;
  next.q_ += p.value() * psi * psi;
  return next;
}

GaussianPosterior WeightedMoments::posterior_mean_var() const {
  if (w_ == 0.0) throw NoEvidenceError("no evidence accumulated (W = 0)");
  const double mu = s_ / w_;
  return {mu, std::max(q_ / w_ - mu * mu, epsilon_)};
}

WeightedMoments merge(const WeightedMoments& a, const WeightedMoments& b) {
  if (a.epsilon() != b.epsilon()) throw ValidationError("cannot merge moments with different epsilon");
  return WeightedMoments::from_parts(a.weight() + b.weight(), a.first() + b.first(),
                                     a.second() + b.second(), a.epsilon());
}

}  // namespace physfuse
