#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's numerics; each function restates the math in a different form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

inline bool rel_close(double a, double b, double tol) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= tol * scale;
}

inline bool vec_rel_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!rel_close(a[i], b[i], tol)) return false;
  return true;
}

struct Obs {
  std::size_t cls;
  double psi;
  double p;
};

/// alpha_i = alpha0_i + lambda * sum of confidences reported for class i.
inline std::vector<double> dirichlet_batch(std::vector<double> alpha0, double lambda, const std::vector<Obs>& obs) {
  std::vector<double> mass(alpha0.size(), 0.0);
  for (const auto& o : obs) mass[o.cls] += o.p;
  for (std::size_t i = 0; i < alpha0.size(); ++i) alpha0[i] += lambda * mass[i];
  return alpha0;
}

/// Two-pass weighted mean and population variance.
inline std::pair<double, double> two_pass(const std::vector<double>& x, const std::vector<double>& w) {
  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) wsum += w[i];
  for (std::size_t i = 0; i < x.size(); ++i) mean += w[i] * x[i];
  mean /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) var += w[i] * (x[i] - mean) * (x[i] - mean);
  return {mean, var / wsum};
}

struct Nig {
  double tau, kappa, alpha, beta;
};

/// Batch NIG posterior from weighted sufficient statistics, written in the
/// centered form beta_n = beta0 + 1/2 sum p (psi - m)^2
///                          + kappa0 W (m - tau0)^2 / (2 (kappa0 + W)),
/// with W = sum p and m the weighted mean.
inline Nig nig_batch(const Nig& prior, const std::vector<double>& psi, const std::vector<double>& p) {
  double w = 0.0, s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    w += p[i];
    s += p[i] * psi[i];
  }
  Nig post = prior;
  post.kappa = prior.kappa + w;
  post.alpha = prior.alpha + w / 2.0;
  post.tau = (prior.kappa * prior.tau + s) / post.kappa;
  if (w == 0.0) return post;
  const double m = s / w;
  double ss = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) ss += p[i] * (psi[i] - m) * (psi[i] - m);
  post.beta = prior.beta + 0.5 * ss + prior.kappa * w * (m - prior.tau) * (m - prior.tau) / (2.0 * (prior.kappa + w));
  return post;
}

/// Composite Simpson rule with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return sum * h / 3.0;
}

/// Direct Gaussian density, written without the library's helpers.
inline double gauss(double x, double mu, double var) {
  const double pi = std::acos(-1.0);
  return std::exp(-(x - mu) * (x - mu) / (2.0 * var)) / std::sqrt(2.0 * pi * var);
}

struct MonteCarlo {
  double mean = 0.0;
  double var = 0.0;
  double mean_se = 0.0;  // standard error of the mean estimate
  double var_se = 0.0;   // standard error of the variance estimate
};

/// Samples a Gaussian mixture: pick a component by weight, then draw.
inline MonteCarlo sample_mixture(const std::vector<double>& w, const std::vector<double>& mu,
                                 const std::vector<double>& var, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs) {
    const std::size_t c = pick(rng);
    x = mu[c] + std::sqrt(var[c]) * z(rng);
  }
  MonteCarlo mc;
  for (double x : xs) mc.mean += x;
  mc.mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = (x - mc.mean) * (x - mc.mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  mc.var = m2;
  mc.mean_se = std::sqrt(m2 / static_cast<double>(n));
  mc.var_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(n));
  return mc;
}

/// Median of a copy.
inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle
