#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "physfuse/dirichlet.hpp"
#include "physfuse/nig.hpp"
#include "physfuse/weighted_moments.hpp"

namespace physfuse {

/// Which per-class estimator supplies the mixture components.
enum class PosteriorBackend { moments, nig };

std::string_view to_string(PosteriorBackend backend);
PosteriorBackend parse_backend(std::string_view name);

/// Gaussian mixture over one property. Component i belongs to material i.
struct MixturePredictive {
  std::vector<double> weights;
  std::vector<GaussianPosterior> components;
  std::string property;
};

/// One class's evidence for one property, as tracked by a fusion session.
struct ClassPropertyState {
  NigBelief nig;
  WeightedMoments moments;
  NigPrior prior;

  friend bool operator==(const ClassPropertyState&, const ClassPropertyState&) = default;
};

/// Mixture with NIG components: mean tau_i, variance aleatoric + epistemic
/// (the predictive variance of a new property value).
MixturePredictive build_mixture(const DirichletBelief& belief, std::span<const NigBelief> per_class,
                                std::string property = {});

/// Mixture with moment components. Classes without evidence use their prior
/// location tau0 and prior aleatoric variance beta0/(alpha0-1). Throws
/// NoEvidenceError naming the class if a class has neither.
MixturePredictive build_mixture(const DirichletBelief& belief,
                                std::span<const WeightedMoments> per_class,
                                std::span<const std::optional<NigPrior>> fallback,
                                std::string property = {});

MixturePredictive build_mixture(const DirichletBelief& belief,
                                std::span<const ClassPropertyState> per_class,
                                PosteriorBackend backend, std::string property = {});

double normal_pdf(double x, double mu, double sigma2);
double normal_cdf(double x, double mu, double sigma2);

double mixture_density(const MixturePredictive& mx, double psi);
double mixture_cdf(const MixturePredictive& mx, double psi);

/// Inverse CDF by bisection on the analytic CDF, to 1e-9 in probability.
double mixture_quantile(const MixturePredictive& mx, double prob);

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;
};

/// Law of total expectation / variance.
MeanVar mixture_mean_var(const MixturePredictive& mx);

/// Mixture mean: the squared-loss point estimate of the marginal predictive.
double mixture_mmse(const MixturePredictive& mx);

/// Central credible interval at the given level.
struct Interval {
  double lower;
  double upper;
  [[nodiscard]] bool contains(double v) const { return v >= lower && v <= upper; }
};
Interval central_interval(const MixturePredictive& mx, double level);

/// Lifts the NIG decomposition to the mixture:
///   aleatoric = sum w_i E[sigma_i^2]
///   epistemic = sum w_i Var[mu_i] + between_class
/// where between_class = sum w_i tau_i^2 - (sum w_i tau_i)^2 is counted as
/// epistemic because more class evidence resolves it.
UncertaintyReport mixture_total_uncertainty(const DirichletBelief& belief,
                                            std::span<const NigBelief> per_class);

}  // namespace physfuse
