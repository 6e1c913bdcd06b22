#include <random>
#include <sstream>

#include "doctest.h"
#include "physfuse/error.hpp"
#include "physfuse/observations_io.hpp"

using namespace physfuse;

namespace {

ParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_observations(in, "mem");
}

}  // namespace

TEST_SUITE("observation parsing") {
  TEST_CASE("two candidates yield two records sharing ids") {
    const auto r = parse(R"({"schema":1,"view_id":"v0","segment_id":7,"caption":"a mug",)"
                         R"("candidates":[{"material":"ceramic","confidence":0.7,"properties":{"density":2300}},)"
                         R"({"material":"glass","confidence":0.2}]})"
                         "\n");
    REQUIRE(r.records.size() == 2);
    CHECK(r.errors.empty());
    CHECK(r.records[0].segment_id == "7");
    CHECK(r.records[1].segment_id == "7");
    CHECK(r.records[0].view_id == "v0");
    CHECK(r.records[0].material == "ceramic");
    CHECK(r.records[0].properties.at("density") == 2300.0);
    CHECK(r.records[1].properties.empty());
    CHECK(*r.records[1].caption == "a mug");
    CHECK(r.records[0].source.file == "mem");
    CHECK(r.records[0].source.line == 1);
    CHECK(r.seen() == 2);
  }

  TEST_CASE("a bad candidate is dropped and its siblings kept") {
    const auto r = parse(R"({"schema":1,"view_id":"v","segment_id":"s","candidates":[)"
                         R"({"material":"wood","confidence":1.2},{"material":"steel","confidence":0.9}]})");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].material == "steel");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 1);
    CHECK(*r.errors[0].candidate == 0);
    CHECK(r.rejected_candidates == 1);
    CHECK(r.seen() == 2);
  }

  TEST_CASE("empty input") {
    const auto r = parse("");
    CHECK(r.records.empty());
    CHECK(r.errors.empty());
    CHECK(r.seen() == 0);
    CHECK(parse("\n  \n\t\n").lines == 0);
  }

  TEST_CASE("malformed lines are reported with their line numbers") {
    const std::string good = R"({"schema":1,"view_id":"v","segment_id":"s","candidates":[{"material":"a","confidence":0.5}]})";
    const auto r = parse(good + "\n" + "{not json\n" + R"({"schema":2,"view_id":"v","segment_id":"s","candidates":[]})" +
                         "\n\n" + R"({"schema":1,"segment_id":"s","candidates":[]})" + "\n" + "[1,2]\n" + good + "\n" +
                         R"({"schema":1,"view_id":"v","segment_id":"s","candidates":[{"material":"a","confidence":0.5,"properties":{"d":"x"}}]})");
    CHECK(r.records.size() == 2);
    CHECK(r.rejected_lines == 4);
    CHECK(r.rejected_candidates == 1);
    std::vector<std::size_t> lines;
    for (const auto& e : r.errors) lines.push_back(e.line);
    CHECK(lines == std::vector<std::size_t>{2, 3, 5, 6, 8});
    CHECK(r.seen() == r.records.size() + r.rejected_candidates + r.rejected_lines);
  }

  TEST_CASE("ObservationLine serializes into the parsed schema") {
    ObservationLine line{"view 2", "seg", std::string("red"), {{"rubber", 0.25, {{"friction", 0.9}}}}};
    const auto r = parse(to_json(line).dump());
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].view_id == "view 2");
    CHECK(r.records[0].confidence == 0.25);
    CHECK(r.records[0].properties.at("friction") == 0.9);
  }

  TEST_CASE("missing file") { CHECK_THROWS_AS(parse_observations_file("/nonexistent/obs.jsonl"), IoError); }

  TEST_CASE("fuzzed input never throws and keeps the counts consistent") {
    const std::string seed_line =
        R"({"schema":1,"view_id":"v1","segment_id":"s1","caption":"x","candidates":[{"material":"wood","confidence":0.5,"properties":{"density":600,"friction":0.4}}]})";
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 2000; ++trial) {
      std::string text;
      const int lines = 1 + static_cast<int>(rng() % 6);
      for (int l = 0; l < lines; ++l) {
        std::string s = seed_line;
        const int edits = static_cast<int>(rng() % 8);
        for (int e = 0; e < edits; ++e) {
          const std::size_t pos = s.empty() ? 0 : rng() % s.size();
          switch (rng() % 4) {
            case 0:
              if (!s.empty()) s.erase(pos, 1 + rng() % 5);
              break;
            case 1:
              s.insert(pos, 1, static_cast<char>(rng() % 256));
              break;
            case 2:
              if (!s.empty()) s[pos] = static_cast<char>(rng() % 256);
              break;
            default:
              s.insert(pos, seed_line.substr(rng() % seed_line.size(), rng() % 12));
          }
        }
        text += s + "\n";
      }
      ParseResult r;
      CHECK_NOTHROW(r = parse(text));
      CHECK(r.seen() == r.records.size() + r.rejected_candidates + r.rejected_lines);
      CHECK(r.errors.size() == r.rejected_candidates + r.rejected_lines);
      for (const auto& rec : r.records) {
        CHECK(rec.confidence >= 0.0);
        CHECK(rec.confidence <= 1.0);
      }
    }
  }
}
