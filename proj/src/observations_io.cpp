#include "physfuse/observations_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "physfuse/error.hpp"

namespace physfuse {

namespace {

bool is_blank(const std::string& s) {
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  return true;
}

// Accepts string or integer identifiers.
std::optional<std::string> identifier(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (it->is_string()) {
    auto s = it->get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  }
  if (it->is_number_integer()) return it->dump();
  return std::nullopt;
}

std::string describe_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

nlohmann::json to_json(const ObservationLine& line) {
  nlohmann::json j;
  j["schema"] = kObservationSchemaVersion;
  j["view_id"] = line.view_id;
  j["segment_id"] = line.segment_id;
  if (line.caption) j["caption"] = *line.caption;
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : line.candidates) {
    cands.push_back({{"material", c.material}, {"confidence", c.confidence}, {"properties", c.properties}});
  }
  j["candidates"] = std::move(cands);
  return j;
}

ParseResult parse_observations(std::istream& in, const std::string& source_name) {
  ParseResult result;
  std::string text;
  std::size_t line_no = 0;
  auto reject_line = [&](std::string message) {
    ++result.rejected_lines;
    result.errors.push_back({line_no, std::nullopt, std::move(message)});
  };

  while (std::getline(in, text)) {
    ++line_no;
    if (is_blank(text)) continue;
    ++result.lines;

    nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      reject_line("invalid JSON");
      continue;
    }
    if (!j.is_object()) {
      reject_line("line is not a JSON object");
      continue;
    }
    auto schema = j.find("schema");
    if (schema == j.end() || !schema->is_number_integer() ||
        schema->get<long long>() != kObservationSchemaVersion) {
      reject_line("missing or unsupported 'schema' (expected 1)");
      continue;
    }
    auto view = identifier(j, "view_id");
    auto segment = identifier(j, "segment_id");
    if (!view || !segment) {
      reject_line("'view_id' and 'segment_id' must be non-empty strings or integers");
      continue;
    }
    std::optional<std::string> caption;
    if (auto c = j.find("caption"); c != j.end() && !c->is_null()) {
      if (!c->is_string()) {
        reject_line("'caption' must be a string");
        continue;
      }
      caption = c->get<std::string>();
    }
    std::optional<std::string> timestamp;
    if (auto t = j.find("timestamp"); t != j.end() && t->is_string()) timestamp = t->get<std::string>();

    auto cands = j.find("candidates");
    if (cands == j.end() || !cands->is_array()) {
      reject_line("'candidates' must be an array");
      continue;
    }

    for (std::size_t ci = 0; ci < cands->size(); ++ci) {
      const auto& cj = (*cands)[ci];
      auto reject_candidate = [&](std::string message) {
        ++result.rejected_candidates;
        result.errors.push_back({line_no, ci, std::move(message)});
      };
      if (!cj.is_object()) {
        reject_candidate("candidate is not an object");
        continue;
      }
      auto mat = cj.find("material");
      if (mat == cj.end() || !mat->is_string() || mat->get<std::string>().empty()) {
        reject_candidate("candidate 'material' must be a non-empty string");
        continue;
      }
      auto conf = cj.find("confidence");
      if (conf == cj.end() || !conf->is_number()) {
        reject_candidate("candidate 'confidence' must be a number");
        continue;
      }
      const double p = conf->get<double>();
      if (!(p >= 0.0 && p <= 1.0)) {
        reject_candidate("confidence " + describe_number(p) + " outside [0,1]");
        continue;
      }
      std::map<std::string, double> props;
      bool props_ok = true;
      if (auto pj = cj.find("properties"); pj != cj.end() && !pj->is_null()) {
        if (!pj->is_object()) {
          reject_candidate("candidate 'properties' must be an object");
          continue;
        }
        for (const auto& [name, value] : pj->items()) {
          if (!value.is_number() || !std::isfinite(value.get<double>())) {
            reject_candidate("property '" + name + "' must be a finite number");
            props_ok = false;
            break;
          }
          props[name] = value.get<double>();
        }
      }
      if (!props_ok) continue;

      ObservationRecord rec;
      rec.segment_id = *segment;
      rec.view_id = *view;
      rec.material = mat->get<std::string>();
      rec.confidence = p;
      rec.properties = std::move(props);
      rec.caption = caption;
      rec.source = {source_name, line_no, timestamp};
      result.records.push_back(std::move(rec));
    }
  }
  if (in.bad()) throw IoError("read failure on '" + source_name + "'");
  return result;
}

ParseResult parse_observations_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open observations file '" + path + "'");
  return parse_observations(in, path);
}

}  // namespace physfuse
