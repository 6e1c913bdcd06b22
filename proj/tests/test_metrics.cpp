#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "physfuse/error.hpp"
#include "physfuse/metrics.hpp"
#include "test_support.hpp"

using namespace physfuse;

TEST_SUITE("metrics") {
  TEST_CASE("single pairs") {
    const auto m = metrics(10, 8);
    CHECK(m.ade == 2.0);
    CHECK(m.alde == doctest::Approx(std::log(1.25)));
    CHECK(m.ape == doctest::Approx(0.2));
    CHECK(m.mnre == doctest::Approx(0.8));

    const auto same = metrics(3.7, 3.7);
    CHECK(same.ade == 0.0);
    CHECK(same.alde == 0.0);
    CHECK(same.ape == 0.0);
    CHECK(same.mnre == 1.0);

    const auto far = metrics(1, 1000);
    CHECK(far.ade == 999.0);
    CHECK(far.alde == doctest::Approx(std::log(1000.0)));
    CHECK(far.ape == 999.0);
    CHECK(far.mnre == doctest::Approx(1e-3));

    CHECK_THROWS_AS((void)metrics(0, 1), DomainError);
    CHECK_THROWS_AS((void)metrics(1, -1), DomainError);
    CHECK_THROWS_AS((void)metrics(NAN, 1), DomainError);
  }

  TEST_CASE("per-item identities on random pairs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> expo(-6.0, 6.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const double m = std::exp(expo(rng)), h = std::exp(expo(rng));
      const auto r = metrics(m, h);
      CHECK(r.mnre == doctest::Approx(std::exp(-r.alde)).epsilon(1e-12));
      CHECK(r.mnre > 0.0);
      CHECK(r.mnre <= 1.0);
      CHECK(r.alde == doctest::Approx(metrics(h, m).alde).epsilon(1e-12));
      CHECK(r.mnre == metrics(h, m).mnre);
      const double c = std::exp(expo(rng));
      const auto scaled = metrics(c * m, c * h);
      CHECK(std::abs(scaled.alde - r.alde) <= 1e-9 * std::max(1.0, r.alde));
      CHECK(scaled.ape == doctest::Approx(r.ape).epsilon(1e-9));
      CHECK(scaled.mnre == doctest::Approx(r.mnre).epsilon(1e-9));
    }
  }

  TEST_CASE("evaluate averages without weighting") {
    const std::vector<EvalPair> pairs = {{"a", 10, 8}, {"b", 2, 2}, {"c", 1, 4}};
    const auto r = evaluate(pairs);
    CHECK(r.n == 3);
    CHECK(r.ade == doctest::Approx((2.0 + 0.0 + 3.0) / 3.0));
    CHECK(r.mnre == doctest::Approx((0.8 + 1.0 + 0.25) / 3.0));
    CHECK(r.items[2].pair.id == "c");
    CHECK(r.summary_json().at("n") == 3);
    CHECK_THROWS_AS((void)evaluate(std::vector<EvalPair>{}), DomainError);
    try {
      (void)evaluate(std::vector<EvalPair>{{"ok", 1, 1}, {"zero", 0, 1}});
      FAIL("expected a throw");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("zero") != std::string::npos);
    }
  }

  TEST_CASE("pairs CSV") {
    std::istringstream ok("id,ground_truth,prediction\n\"a, b\",1.5,2\r\nc,3,3\n\n");
    const auto pairs = read_pairs_csv(ok);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].id == "a, b");
    CHECK(pairs[0].prediction == 2.0);

    std::istringstream bad_value("id,ground_truth,prediction\nx,1,2\ny,abc,2\n");
    CHECK_THROWS_WITH_AS(read_pairs_csv(bad_value), doctest::Contains("line 3"), ValidationError);
    std::istringstream bad_cols("id,ground_truth,prediction\nx,1\n");
    CHECK_THROWS_WITH_AS(read_pairs_csv(bad_cols), doctest::Contains("line 2"), ValidationError);
    std::istringstream bad_header("name,truth,guess\n");
    CHECK_THROWS_WITH_AS(read_pairs_csv(bad_header), doctest::Contains("line 1"), ValidationError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_pairs_csv(empty), ValidationError);
  }

  TEST_CASE("table CSV round-trips through the pairs reader") {
    const std::vector<EvalPair> pairs = {{"x,y", 2, 3}, {"q\"t", 5, 4}};
    std::stringstream table;
    evaluate(pairs).write_table_csv(table);
    std::string header;
    std::getline(table, header);
    CHECK(header == "id,ground_truth,prediction,ade,alde,ape,mnre");
    std::string row;
    std::getline(table, row);
    CHECK(row.rfind("\"x,y\",2,3,", 0) == 0);
  }

  TEST_CASE("golden pairs fixture") {
    std::ifstream in(testlib::fixture("pairs.csv"));
    REQUIRE(in.good());
    const auto r = evaluate(read_pairs_csv(in));
    CHECK(r.n == 5);
    CHECK(r.ade == doctest::Approx(3.574).epsilon(1e-12));
    CHECK(r.alde == doctest::Approx(0.23263016196113617).epsilon(1e-12));
    CHECK(r.ape == doctest::Approx(0.22333333333333333).epsilon(1e-12));
    CHECK(r.mnre == doctest::Approx(0.8).epsilon(1e-12));
  }
}
