#include "physfuse/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "physfuse/error.hpp"

namespace physfuse {

std::string_view to_string(PosteriorBackend backend) {
  return backend == PosteriorBackend::nig ? "nig" : "moments";
}

PosteriorBackend parse_backend(std::string_view name) {
  if (name == "nig") return PosteriorBackend::nig;
  if (name == "moments") return PosteriorBackend::moments;
  throw ValidationError("unknown posterior backend '" + std::string(name) + "' (expected nig|moments)");
}

MixturePredictive build_mixture(const DirichletBelief& belief, std::span<const NigBelief> per_class,
                                std::string property) {
  if (per_class.size() != belief.size())
    throw ValidationError("mixture needs one component per class");
  MixturePredictive mx{belief.class_posterior(), {}, std::move(property)};
  mx.components.reserve(per_class.size());
  for (const auto& nig : per_class)
    mx.components.push_back({nig.tau(), nig.predictive_uncertainty().total});
  return mx;
}

MixturePredictive build_mixture(const DirichletBelief& belief,
                                std::span<const WeightedMoments> per_class,
                                std::span<const std::optional<NigPrior>> fallback,
                                std::string property) {
  if (per_class.size() != belief.size())
    throw ValidationError("mixture needs one component per class");
  MixturePredictive mx{belief.class_posterior(), {}, std::move(property)};
  mx.components.reserve(per_class.size());
  for (std::size_t i = 0; i < per_class.size(); ++i) {
    if (!per_class[i].empty()) {
      mx.components.push_back(per_class[i].gaussian_posterior());
      continue;
    }
    if (i >= fallback.size() || !fallback[i])
      throw NoEvidenceError("class " + std::to_string(i) + " has no evidence and no prior fallback");
    const NigPrior& p = *fallback[i];
    mx.components.push_back({p.tau, p.beta / (p.alpha - 1.0)});
  }
  return mx;
}

MixturePredictive build_mixture(const DirichletBelief& belief,
                                std::span<const ClassPropertyState> per_class,
                                PosteriorBackend backend, std::string property) {
  if (backend == PosteriorBackend::nig) {
    std::vector<NigBelief> nigs;
    nigs.reserve(per_class.size());
    for (const auto& c : per_class) nigs.push_back(c.nig);
    return build_mixture(belief, nigs, std::move(property));
  }
  std::vector<WeightedMoments> moments;
  std::vector<std::optional<NigPrior>> priors;
  for (const auto& c : per_class) {
    moments.push_back(c.moments);
    priors.emplace_back(c.prior);
  }
  return build_mixture(belief, moments, priors, std::move(property));
}

double normal_pdf(double x, double mu, double sigma2) {
  const double z = x - mu;
  return std::exp(-0.5 * z * z / sigma2) / std::sqrt(2.0 * std::numbers::pi * sigma2);
}

double normal_cdf(double x, double mu, double sigma2) {
  return 0.5 * std::erfc(-(x - mu) / std::sqrt(2.0 * sigma2));
}

double mixture_density(const MixturePredictive& mx, double psi) {
  double f = 0.0;
  for (std::size_t i = 0; i < mx.components.size(); ++i) {
    if (mx.weights[i] == 0.0) continue;
    f += mx.weights[i] * normal_pdf(psi, mx.components[i].mu, mx.components[i].sigma2);
  }
  return f;
}

double mixture_cdf(const MixturePredictive& mx, double psi) {
  double c = 0.0;
  for (std::size_t i = 0; i < mx.components.size(); ++i) {
    if (mx.weights[i] == 0.0) continue;
    c += mx.weights[i] * normal_cdf(psi, mx.components[i].mu, mx.components[i].sigma2);
  }
  return std::clamp(c, 0.0, 1.0);
}

double mixture_quantile(const MixturePredictive& mx, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < mx.components.size(); ++i) {
    if (mx.weights[i] == 0.0) continue;
    const double sd = std::sqrt(mx.components[i].sigma2);
    lo = std::min(lo, mx.components[i].mu - 40.0 * sd);
    hi = std::max(hi, mx.components[i].mu + 40.0 * sd);
  }
  if (!(lo < hi)) throw DomainError("mixture has no weighted components");
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double c = mixture_cdf(mx, mid);
    if (std::abs(c - prob) <= 1e-9) return mid;
    if (c < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (!(lo < 0.5 * (lo + hi) && 0.5 * (lo + hi) < hi)) break;
  }
  return 0.5 * (lo + hi);
}

MeanVar mixture_mean_var(const MixturePredictive& mx) {
  double mean = 0.0;
  for (std::size_t i = 0; i < mx.components.size(); ++i) mean += mx.weights[i] * mx.components[i].mu;
  // Centered form of sum w (sigma^2 + mu^2) - mean^2.
  double var = 0.0;
  for (std::size_t i = 0; i < mx.components.size(); ++i) {
    const double d = mx.components[i].mu - mean;
    var += mx.weights[i] * (mx.components[i].sigma2 + d * d);
  }
  return {mean, var};
}

double mixture_mmse(const MixturePredictive& mx) { return mixture_mean_var(mx).mean; }

Interval central_interval(const MixturePredictive& mx, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0,1)");
  const double tail = 0.5 * (1.0 - level);
  return {mixture_quantile(mx, tail), mixture_quantile(mx, 1.0 - tail)};
}

UncertaintyReport mixture_total_uncertainty(const DirichletBelief& belief,
                                            std::span<const NigBelief> per_class) {
  if (per_class.size() != belief.size())
    throw ValidationError("mixture needs one component per class");
  const auto w = belief.class_posterior();
  UncertaintyReport out;
  double mean = 0.0;
  double within_epistemic = 0.0;
  for (std::size_t i = 0; i < per_class.size(); ++i) {
    const auto r = per_class[i].predictive_uncertainty();
    out.aleatoric += w[i] * r.aleatoric;
    within_epistemic += w[i] * r.epistemic;
    mean += w[i] * per_class[i].tau();
  }
  if (per_class.size() > 1) {
    for (std::size_t i = 0; i < per_class.size(); ++i) {
      const double d = per_class[i].tau() - mean;
      out.between_class += w[i] * d * d;
    }
  }
  out.epistemic = within_epistemic + out.between_class;
  out.total = out.aleatoric + out.epistemic;
  return out;
}

}  // namespace physfuse
