#include <cmath>

#include "doctest.h"
#include "physfuse/core_types.hpp"
#include "physfuse/error.hpp"
#include "test_support.hpp"

using namespace physfuse;

TEST_SUITE("core types") {
  TEST_CASE("confidence bounds") {
    CHECK(Confidence(0.0).value() == 0.0);
    CHECK(Confidence(1.0).value() == 1.0);
    CHECK_THROWS_AS(Confidence(1.3), ValidationError);
    CHECK_THROWS_AS(Confidence(-0.1), ValidationError);
    CHECK_THROWS_AS(Confidence(std::nan("")), ValidationError);
  }

  TEST_CASE("default prior puts aleatoric sd at ten percent of nominal") {
    const NigPrior p = default_prior(2000.0, 1e-12);
    CHECK(p.tau == 2000.0);
    CHECK(p.kappa == 1e-3);
    CHECK(p.alpha == 2.0);
    CHECK(std::sqrt(p.beta / (p.alpha - 1.0)) == doctest::Approx(200.0));
    // a zero nominal still gives a proper prior
    CHECK(default_prior(0.0, 1e-12).beta > 0.0);
  }

  TEST_CASE("builtin properties exclude negative values") {
    for (const char* name : {"density", "friction", "hardness", "stiffness"}) {
      const auto p = builtin_property(name);
      REQUIRE(p.has_value());
      CHECK(p->support.lower == 0.0);
      CHECK_FALSE(p->support.contains(-1e-9));
    }
    CHECK(builtin_property("hardness")->support.upper == 100.0);
    CHECK_FALSE(builtin_property("color").has_value());
  }

  TEST_CASE("library invariants") {
    using P = std::map<std::pair<std::size_t, std::string>, NigPrior>;
    const std::vector<PropertyKind> props = {*builtin_property("density")};
    CHECK_THROWS_AS(MaterialLibrary({}, props, {}), ValidationError);
    CHECK_THROWS_AS(MaterialLibrary({"wood", "wood"}, props, P{{{0, "density"}, {}}, {{1, "density"}, {}}}),
                    ValidationError);
    // missing prior for class 1
    CHECK_THROWS_AS(MaterialLibrary({"wood", "steel"}, props, P{{{0, "density"}, {}}}), ValidationError);
    CHECK_THROWS_AS(MaterialLibrary({"wood"}, props, P{{{0, "density"}, {0.0, 1e-3, 1.0, 1.0}}}), ValidationError);
    CHECK_THROWS_AS(MaterialLibrary({"wood"}, props, P{{{0, "density"}, {0.0, 0.0, 2.0, 1.0}}}), ValidationError);
    CHECK_THROWS_AS(MaterialLibrary({"wood"}, props, P{{{0, "density"}, {0.0, 1e-3, 2.0, 0.0}}}), ValidationError);
    const MaterialLibrary ok({"wood"}, props, P{{{0, "density"}, {600.0, 1e-3, 2.0, 3600.0}}});
    CHECK(ok.size() == 1);
    CHECK(ok.colors().size() == 1);
  }

  TEST_CASE("library json: nominal shorthand, explicit hyperparameters, stable ordering") {
    const auto j = nlohmann::json::parse(R"({
      "classes": ["steel", "wood", "rubber"],
      "priors": {
        "steel": {"density": 7850},
        "wood": {"density": {"nominal": 600, "kappa": 0.5, "alpha": 3}},
        "rubber": {"density": {"tau": 1100, "kappa": 1, "alpha": 2, "beta": 7}}
      },
      "colors": {"wood": [1, 2, 3]}
    })");
    const MaterialLibrary lib = MaterialLibrary::from_json(j);
    CHECK(lib.classes() == std::vector<std::string>{"steel", "wood", "rubber"});
    CHECK(*lib.index_of("rubber") == 2);
    CHECK_FALSE(lib.index_of("glass").has_value());
    CHECK(lib.prior(0, "density") == default_prior(7850.0, 1e-12));
    const NigPrior& wood = lib.prior(1, "density");
    CHECK(wood.kappa == 0.5);
    CHECK(wood.alpha == 3.0);
    CHECK(wood.beta == doctest::Approx(60.0 * 60.0 * 2.0));
    CHECK(lib.prior(2, "density") == NigPrior{1100.0, 1.0, 2.0, 7.0});
    CHECK(lib.color(1) == Rgb{1, 2, 3});
    REQUIRE(lib.property("density") != nullptr);
    CHECK(lib.property("density")->units == "kg/m^3");

    const MaterialLibrary again = MaterialLibrary::from_json(lib.to_json());
    CHECK(again == lib);
  }

  TEST_CASE("library json errors") {
    CHECK_THROWS_AS(MaterialLibrary::from_json(nlohmann::json::parse(R"({"priors": {}})")), ValidationError);
    CHECK_THROWS_AS(MaterialLibrary::from_json(nlohmann::json::parse(
                        R"({"classes": ["a"], "priors": {"b": {"density": 1}}})")),
                    ValidationError);
    CHECK_THROWS_AS(MaterialLibrary::load("/nonexistent/library.json"), IoError);
  }

  TEST_CASE("validate_observation") {
    const MaterialLibrary lib = testlib::library({"wood", "steel"});
    Observation ok{"s", "v", 0, 0.8, {{"density", 650.0}}, std::nullopt};
    CHECK(validate_observation(ok, lib).ok());

    Observation hot = ok;
    hot.confidence = 1.3;
    const auto r1 = validate_observation(hot, lib);
    CHECK(r1.violations.size() == 1);
    CHECK(r1.count(ViolationKind::confidence_range) == 1);

    Observation unknown = ok;
    unknown.class_index = lib.size();
    const auto r2 = validate_observation(unknown, lib);
    CHECK(r2.violations.size() == 1);
    CHECK(r2.count(ViolationKind::unknown_class) == 1);

    Observation negative = ok;
    negative.properties["friction"] = -0.2;
    CHECK(validate_observation(negative, lib).count(ViolationKind::property_support) == 1);

    Observation nan = ok;
    nan.properties["density"] = std::nan("");
    CHECK(validate_observation(nan, lib).count(ViolationKind::non_finite) == 1);

    // boundary values and unknown property names are accepted
    Observation edge = ok;
    edge.confidence = 0.0;
    edge.properties = {{"friction", 0.0}, {"color", -5.0}};
    CHECK(validate_observation(edge, lib).ok());

    Observation everything = ok;
    everything.confidence = 2.0;
    everything.class_index = 9;
    everything.properties["density"] = -1.0;
    const auto all = validate_observation(everything, lib);
    CHECK(all.violations.size() == 3);
    CHECK_FALSE(all.summary().empty());
  }

  TEST_CASE("observation json round trip is exact") {
    Observation o{"seg-7", "view 3", 2, 0.1 + 0.2, {{"density", 1.0 / 3.0}, {"friction", 5e-324}}, "a red brick"};
    const Observation back = observation_from_json(nlohmann::json::parse(to_json(o).dump()));
    CHECK(back == o);
    o.caption.reset();
    CHECK(observation_from_json(to_json(o)) == o);
  }
}
