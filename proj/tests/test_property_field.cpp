#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "physfuse/error.hpp"
#include "physfuse/property_field.hpp"
#include "test_support.hpp"

using namespace physfuse;

namespace {

ObservationRecord rec(std::string seg, std::string material, double p, std::map<std::string, double> props = {}) {
  ObservationRecord r;
  r.segment_id = std::move(seg);
  r.view_id = "v";
  r.material = std::move(material);
  r.confidence = p;
  r.properties = std::move(props);
  return r;
}

SplatPoint splat(Vec3 pos, double scale, double opacity, std::string seg) {
  return {pos, {scale, scale, scale}, opacity, std::move(seg)};
}

/// One class with a tight density prior so the segment estimate is known.
FusionSession tight_session(const std::vector<std::string>& segments, double density = 1000.0) {
  FusionSession s(testlib::library({"wood"}, {density, 1e6, 1e6, 1e6}));
  for (const auto& id : segments) s.ensure_segment(id);
  return s;
}

}  // namespace

TEST_SUITE("property field") {
  TEST_CASE("a single-class segment without evidence reports the prior") {
    std::vector<PropertyKind> props = {*builtin_property("friction")};
    std::map<std::pair<std::size_t, std::string>, NigPrior> priors = {{{0, "friction"}, default_prior(0.6, 1e-12)}};
    FusionSession s(MaterialLibrary({"wood"}, props, priors));
    s.absorb(rec("a", "wood", 0.9));
    const SemanticPointField field({splat({0, 0, 0}, 1, 1, "a"), splat({1, 0, 0}, 1, 1, "a")}, s);
    const auto q = field.query_point(0, "friction");
    CHECK(q.mmse == doctest::Approx(0.6));
    CHECK(q.map_material == "wood");
    CHECK(q.map_material_mmse == doctest::Approx(0.6));
    const auto r = field.query_point(1, "friction");
    CHECK(r.mmse == q.mmse);
    CHECK(r.uncertainty.total == q.uncertainty.total);
  }

  TEST_CASE("queries follow the segment posterior") {
    FusionSession s(testlib::library({"wood", "ceramic"}, {1000, 1, 2, 1e4}));
    s.absorb(rec("a", "ceramic", 1.0, {{"density", 3000}}));
    const SemanticPointField field({splat({0, 0, 0}, 1, 1, "a"), splat({0, 0, 0}, 1, 1, ""), splat({0, 0, 0}, 1, 1, "zz")},
                                   s);
    const auto q = field.query_point(0, "density");
    CHECK(q.map_material == "ceramic");
    CHECK(q.map_material_mmse == doctest::Approx(2000.0));
    CHECK(q.mmse == doctest::Approx(2.0 / 3.0 * 2000.0 + 1.0 / 3.0 * 1000.0));
    CHECK(q.uncertainty.between_class > 0.0);
    CHECK(field.unlabeled_count() == 2);
    CHECK_FALSE(field.labeled(1));
    CHECK_FALSE(field.labeled(2));
    CHECK_THROWS_AS((void)field.query_point(1, "density"), ValidationError);
    CHECK_THROWS_AS((void)field.query_point(9, "density"), ValidationError);
    CHECK_THROWS_AS((void)field.query_point(0, "hardness"), ValidationError);
  }

  TEST_CASE("a single splat occupies its threshold ellipsoid") {
    const SemanticPointField field({splat({0.3, -0.2, 5.0}, 1.0, 1.0, "a")}, tight_session({"a"}));
    const auto grid = voxelize(field, "density", {0.1, 0.05});
    const double reach = std::sqrt(2.0 * std::log(20.0));
    const double expected = 4.0 / 3.0 * std::numbers::pi * reach * reach * reach / 1e-3;
    CHECK(static_cast<double>(grid.cells.size()) == doctest::Approx(expected).epsilon(0.02));
    for (const auto& c : grid.cells) {
      CHECK(c.mmse == doctest::Approx(1000.0));
      CHECK(c.segment_id == "a");
      const Vec3 ctr = grid.center(c.index);
      const double d2 = std::pow(ctr[0] - 0.3, 2) + std::pow(ctr[1] + 0.2, 2) + std::pow(ctr[2] - 5.0, 2);
      CHECK(std::exp(-0.5 * d2) > 0.05);
    }
    const auto mass = integrate_mass(grid);
    CHECK(mass.mass_kg == doctest::Approx(1000.0 * expected * 1e-3).epsilon(0.02));
    CHECK(mass.occupied_voxels == grid.cells.size());
  }

  TEST_CASE("transparent and unlabeled splats occupy nothing") {
    const SemanticPointField field({splat({0, 0, 0}, 1.0, 0.0, "a"), splat({3, 0, 0}, 1.0, 1.0, "")},
                                   tight_session({"a"}));
    const auto grid = voxelize(field, "density", {0.1, 0.05});
    CHECK(grid.cells.empty());
    CHECK(integrate_mass(grid).mass_kg == 0.0);
    CHECK(integrate_mass(grid).variance_kg2 == 0.0);
  }

  TEST_CASE("separated segments keep their own estimates") {
    FusionSession s(testlib::library({"light", "heavy"}, {0, 1, 2, 1}));
    s.ensure_segment("l");
    s.ensure_segment("h");
    for (int i = 0; i < 50; ++i) {
      s.absorb(rec("l", "light", 1.0, {{"density", 100}}));
      s.absorb(rec("h", "heavy", 1.0, {{"density", 5000}}));
    }
    const SemanticPointField field({splat({0, 0, 0}, 0.1, 1, "l"), splat({5, 0, 0}, 0.1, 1, "h")}, s);
    const auto grid = voxelize(field, "density", {0.02, 0.05});
    std::size_t light = 0, heavy = 0;
    for (const auto& c : grid.cells) {
      if (grid.center(c.index)[0] < 2.5) {
        CHECK(c.segment_id == "l");
        CHECK(c.mmse == doctest::Approx(field.segment_summary("l", "density").mmse));
        ++light;
      } else {
        CHECK(c.segment_id == "h");
        ++heavy;
      }
    }
    CHECK(light == heavy);
    CHECK(light > 0);
  }

  TEST_CASE("mass variance adds deviations within a segment and variances across segments") {
    VoxelGrid g;
    g.property = "density";
    g.voxel_edge = 1.0;
    g.cells = {{{0, 0, 0}, 10, 4, "a"}, {{1, 0, 0}, 10, 4, "a"}, {{5, 0, 0}, 20, 9, "b"}};
    const auto m = integrate_mass(g);
    CHECK(m.mass_kg == 40.0);
    CHECK(m.variance_kg2 == 16.0 + 9.0);
    g.property = "friction";
    CHECK_THROWS_AS((void)integrate_mass(g), ValidationError);
  }

  TEST_CASE("mass is invariant to translation") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SplatPoint> pts;
    for (int i = 0; i < 200; ++i)
      pts.push_back(splat({u(rng), u(rng), u(rng)}, 0.02 + 0.05 * u(rng), 0.2 + 0.8 * u(rng), std::to_string(i % 3)));
    const FusionSession s = tight_session({"0", "1", "2"});
    const auto base = integrate_mass(voxelize(SemanticPointField(pts, s), "density", {0.02, 0.05}));
    for (const Vec3 shift : {Vec3{12.5, -3.25, 0.75}, Vec3{-100.0, 40.0, 7.0}}) {
      auto moved = pts;
      for (auto& p : moved)
        for (int k = 0; k < 3; ++k) p.position[k] += shift[k];
      const auto m = integrate_mass(voxelize(SemanticPointField(moved, s), "density", {0.02, 0.05}));
      CHECK(std::abs(m.mass_kg - base.mass_kg) <= 1e-9 * base.mass_kg);
    }
  }

  TEST_CASE("voxelize rejects bad inputs") {
    const FusionSession s = tight_session({"a"});
    CHECK_THROWS_AS((void)voxelize(SemanticPointField({}, s), "density"), ValidationError);
    const SemanticPointField field({splat({0, 0, 0}, 1, 1, "a")}, s);
    CHECK_THROWS_AS((void)voxelize(field, "hardness"), ValidationError);
    CHECK_THROWS_AS((void)voxelize(field, "density", {0.1, 1.5}), ValidationError);
    CHECK_THROWS_AS((void)voxelize(field, "density", {-1.0, 0.05}), ValidationError);
    const auto grid = voxelize(field, "density");
    CHECK(grid.voxel_edge > 0.0);
    CHECK(grid.to_json().at("occupied").size() == grid.cells.size());
  }

  TEST_CASE("material map marks unlabeled points with the sentinel color") {
    FusionSession s(testlib::library({"wood", "steel"}));
    s.absorb(rec("a", "steel", 1.0));
    std::vector<SplatPoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(splat({double(i), 0, 0}, 1, 1, i % 3 == 0 ? "a" : (i % 3 == 1 ? "" : "b")));
    const SemanticPointField field(pts, s);
    const auto map = export_material_map(field);
    std::size_t sentinel = 0;
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (map[i].color == kUnlabeledColor) ++sentinel;
      if (map[i].labeled) CHECK(map[i].color == s.library().color(1));
      CHECK(map[i].position == pts[i].position);
    }
    CHECK(sentinel == field.unlabeled_count());
    CHECK(sentinel == 20);
  }
}
