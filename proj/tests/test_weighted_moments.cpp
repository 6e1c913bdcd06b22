#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "physfuse/error.hpp"
#include "physfuse/weighted_moments.hpp"

using namespace physfuse;

namespace {

WeightedMoments fold(const std::vector<double>& x, const std::vector<double>& w, std::size_t from, std::size_t to) {
  WeightedMoments m;
  for (std::size_t i = from; i < to; ++i) m = m.accumulate(x[i], Confidence(w[i]));
  return m;
}

}  // namespace

TEST_SUITE("weighted moments") {
  TEST_CASE("accumulate") {
    const WeightedMoments one = WeightedMoments().accumulate(2.0, Confidence(1.0));
    CHECK(one.weight() == 1.0);
    CHECK(one.first() == 2.0);
    CHECK(one.second() == 4.0);
    const WeightedMoments two = one.accumulate(4.0, Confidence(1.0));
    CHECK(two == WeightedMoments::from_parts(2, 6, 20, 1e-12));
    CHECK(WeightedMoments().accumulate(3.0, Confidence(0.0)).empty());
    CHECK_THROWS_AS((void)one.accumulate(std::nan(""), Confidence(1.0)), ValidationError);
    CHECK_THROWS_AS((void)one.accumulate(INFINITY, Confidence(1.0)), ValidationError);
  }

  TEST_CASE("posterior mean and variance") {
    const auto g = WeightedMoments::from_parts(2, 6, 20, 1e-12).posterior_mean_var();
    CHECK(g.mu == 3.0);
    CHECK(g.sigma2 == 1.0);

    const auto single = WeightedMoments(1e-6).accumulate(5.0, Confidence(0.7)).posterior_mean_var();
    CHECK(single.mu == doctest::Approx(5.0));
    CHECK(single.sigma2 == 1e-6);

    WeightedMoments m;
    m = m.accumulate(1.0, Confidence(1.0)).accumulate(2.0, Confidence(1.0)).accumulate(2.0, Confidence(1.0));
    m = m.accumulate(3.0, Confidence(1.0));
    // (1,p=1),(2,p=2),(3,p=1) expressed as unit confidences
    CHECK(m.posterior_mean_var().mu == 2.0);
    CHECK(m.posterior_mean_var().sigma2 == 0.5);

    CHECK_THROWS_AS((void)WeightedMoments().posterior_mean_var(), NoEvidenceError);
    CHECK_THROWS_AS((void)WeightedMoments().gaussian_posterior(), DomainError);
  }

  TEST_CASE("constant streams collapse to the floor") {
    WeightedMoments m(1e-9);
    for (double p : {0.1, 0.9, 0.4}) m = m.accumulate(7.25, Confidence(p));
    const auto g = m.gaussian_posterior();
    CHECK(g.mu == doctest::Approx(7.25));
    CHECK(g.sigma2 == 1e-9);
  }

  TEST_CASE("merge") {
    const auto a = WeightedMoments().accumulate(1.0, Confidence(0.5));
    const auto b = WeightedMoments().accumulate(3.0, Confidence(0.25));
    CHECK(merge(WeightedMoments(), a) == a);
    CHECK(merge(a, b) == merge(b, a));
    CHECK_THROWS_AS((void)merge(WeightedMoments(1e-3), WeightedMoments(1e-6)), ValidationError);
  }

  TEST_CASE("matches the two-pass oracle, merges at any split, and ignores order") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 2 + rng() % 2000;
      const double center = std::pow(10.0, 4.0 * u(rng)) * (u(rng) < 0.5 ? -1.0 : 1.0);
      const double spread = std::abs(center) * (0.01 + u(rng));
      std::normal_distribution<double> val(center, spread);
      std::vector<double> x(n), w(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = val(rng);
        w[i] = u(rng);
      }
      const WeightedMoments whole = fold(x, w, 0, n);
      const auto [mean, var] = oracle::two_pass(x, w);
      const auto g = whole.posterior_mean_var();
      CHECK(oracle::rel_close(g.mu, mean, 1e-9));
      CHECK(oracle::rel_close(g.sigma2, std::max(var, whole.epsilon()), 1e-9));
      CHECK(g.sigma2 >= whole.epsilon());
      CHECK(whole.second() * whole.weight() >= whole.first() * whole.first() -
                                                   1e-9 * std::max(1.0, whole.second() * whole.weight()));

      const std::size_t cut = rng() % (n + 1);
      const WeightedMoments joined = merge(fold(x, w, 0, cut), fold(x, w, cut, n));
      CHECK(oracle::rel_close(joined.weight(), whole.weight(), 1e-12));
      CHECK(oracle::rel_close(joined.first(), whole.first(), 1e-12));
      CHECK(oracle::rel_close(joined.second(), whole.second(), 1e-12));

      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
      WeightedMoments perm;
      for (auto i : order) perm = perm.accumulate(x[i], Confidence(w[i]));
      CHECK(oracle::rel_close(perm.first(), whole.first(), 1e-12));
      CHECK(oracle::rel_close(perm.second(), whole.second(), 1e-12));
    }
  }

  TEST_CASE("merge is associative") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
      WeightedMoments parts[3];
      for (auto& p : parts)
        for (int i = 0; i < 20; ++i) p = p.accumulate(u(rng), Confidence((u(rng) + 100.0) / 200.0));
      const auto left = merge(merge(parts[0], parts[1]), parts[2]);
      const auto right = merge(parts[0], merge(parts[1], parts[2]));
      CHECK(oracle::rel_close(left.first(), right.first(), 1e-12));
      CHECK(oracle::rel_close(left.second(), right.second(), 1e-12));
      CHECK(oracle::rel_close(left.weight(), right.weight(), 1e-12));
    }
  }
}
