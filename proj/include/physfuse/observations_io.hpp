#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace physfuse {

inline constexpr int kObservationSchemaVersion = 1;

struct SourceInfo {
  std::string file;
  std::size_t line = 0;
  std::optional<std::string> timestamp;
};

/// One material candidate from one VLM response line. Material names are
/// resolved against the library during fusion, not here.
struct ObservationRecord {
  std::string segment_id;
  std::string view_id;
  std::string material;
  double confidence = 0.0;
  std::map<std::string, double> properties;
  std::optional<std::string> caption;
  SourceInfo source;
};

struct Candidate {
  std::string material;
  double confidence = 0.0;
  std::map<std::string, double> properties;
};

/// One JSONL line: a response for one segment in one view.
struct ObservationLine {
  std::string view_id;
  std::string segment_id;
  std::optional<std::string> caption;
  std::vector<Candidate> candidates;
};

nlohmann::json to_json(const ObservationLine& line);

struct ParseIssue {
  std::size_t line = 0;
  std::optional<std::size_t> candidate;  // set when only one candidate was dropped
  std::string message;
};

struct ParseResult {
  std::vector<ObservationRecord> records;
  std::vector<ParseIssue> errors;
  std::size_t lines = 0;                // non-blank lines read
  std::size_t rejected_lines = 0;       // whole line unusable
  std::size_t rejected_candidates = 0;  // candidate dropped, siblings kept

  /// Every unit the parser looked at: good candidates, bad candidates, and
  /// unusable lines (each counts once).
  [[nodiscard]] std::size_t seen() const {
    return records.size() + rejected_candidates + rejected_lines;
  }
};

/// Parses JSON Lines of the form
///   {"schema":1,"view_id":..,"segment_id":..,"caption":..,
///    "candidates":[{"material":..,"confidence":..,"properties":{..}}]}
/// Malformed input is collected in `errors`; only stream failure throws.
ParseResult parse_observations(std::istream& in, const std::string& source_name = "<stream>");

/// Throws IoError if the file cannot be opened.
ParseResult parse_observations_file(const std::string& path);

}  // namespace physfuse
