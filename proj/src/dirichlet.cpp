#include "physfuse/dirichlet.hpp"

#include <cmath>
#include <string>

#include "physfuse/error.hpp"

namespace physfuse {

DirichletBelief::DirichletBelief(std::vector<double> alpha0, double lambda)
    : prior_(std::move(alpha0)), lambda_(lambda) {
  if (prior_.empty()) throw ValidationError("Dirichlet prior needs at least one class");
  for (std::size_t i = 0; i < prior_.size(); ++i) {
    if (!(prior_[i] > 0.0) || !std::isfinite(prior_[i]))
      throw ValidationError("Dirichlet alpha0[" + std::to_string(i) + "] must be positive and finite");
  }
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
    throw ValidationError("evidence strength lambda must be positive and finite");
  alpha_ = prior_;
}

DirichletBelief DirichletBelief::uniform(std::size_t k, double lambda) {
  return DirichletBelief(std::vector<double>(k, 1.0), lambda);
}

DirichletBelief DirichletBelief::from_parts(std::vector<double> prior, std::vector<double> alpha,
                                            double lambda, double total_weight) {
  DirichletBelief b(prior, lambda);
  if (alpha.size() != b.prior_.size())
    throw ValidationError("Dirichlet alpha length does not match prior length");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] >= b.prior_[i]) || !std::isfinite(alpha[i]))
      throw ValidationError("Dirichlet alpha[" + std::to_string(i) + "] is below its prior");
  }
  if (!(total_weight >= 0.0) || !std::isfinite(total_weight))
    throw ValidationError("Dirichlet total_weight must be nonnegative");
  b.alpha_ = std::move(alpha);
  b.total_weight_ = total_weight;
  return b;
}

DirichletBelief DirichletBelief::absorb(std::size_t class_index, Confidence confidence) const {
  if (class_index >= alpha_.size())
    throw ValidationError("class index " + std::to_string(class_index) + " out of range for K=" +
                          std::to_string(alpha_.size()));
  DirichletBelief next = *this;
  if (confidence.value() == 0.0) return next;
  const double mass = lambda_ * confidence.value();
  next.alpha_[class_index] += mass;
  next.total_weight_ += mass;
  return next;
}

std::vector<double> DirichletBelief::class_posterior() const {
  double sum = 0.0;
  for (double a : alpha_) sum += a;
  std::vector<double> out(alpha_.size());
  for (std::size_t i = 0; i < alpha_.size(); ++i) out[i] = alpha_[i] / sum;
  return out;
}

double DirichletBelief::log_density(std::span<const double> theta) const {
  if (theta.size() != alpha_.size())
    throw ValidationError("theta length does not match K");
  double sum_theta = 0.0;
  for (double t : theta) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("theta must lie in the open simplex");
    sum_theta += t;
  }
  if (std::abs(sum_theta - 1.0) > 1e-9) throw ValidationError("theta must sum to 1");

  double sum_alpha = 0.0;
  double log_norm = 0.0;
  double log_kernel = 0.0;
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    sum_alpha += alpha_[i];
    log_norm -= std::lgamma(alpha_[i]);
    log_kernel += (alpha_[i] - 1.0) * std::log(theta[i]);
  }
  log_norm += std::lgamma(sum_alpha);
  return log_norm + log_kernel;
}

std::size_t DirichletBelief::map_class() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < alpha_.size(); ++i)
    if (alpha_[i] > alpha_[best]) best = i;
  return best;
}

}  // namespace physfuse
