#include "physfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "physfuse/error.hpp"

namespace physfuse {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& s, std::size_t line, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ItemMetrics metrics(double m, double m_hat) {
  if (!(m > 0.0) || !(m_hat > 0.0) || !std::isfinite(m) || !std::isfinite(m_hat))
    throw DomainError("metrics need positive finite ground truth and prediction");
  ItemMetrics r;
  r.ade = std::abs(m - m_hat);
  r.alde = std::abs(std::log(m) - std::log(m_hat));
  r.ape = std::abs((m - m_hat) / m);
  r.mnre = std::min(m / m_hat, m_hat / m);
  return r;
}

MetricReport evaluate(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw DomainError("cannot evaluate an empty list of pairs");
  MetricReport report;
  report.items.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    ItemMetrics m;
    try {
      m = metrics(p.ground_truth, p.prediction);
    } catch (const DomainError&) {
      throw DomainError("item " + std::to_string(i) + " ('" + p.id + "'): ground truth and prediction must be positive");
    }
    report.ade += m.ade;
    report.alde += m.alde;
    report.ape += m.ape;
    report.mnre += m.mnre;
    report.items.push_back({p, m});
  }
  report.n = pairs.size();
  const double n = static_cast<double>(report.n);
  report.ade /= n;
  report.alde /= n;
  report.ape /= n;
  report.mnre /= n;
  return report;
}

nlohmann::json MetricReport::summary_json() const {
  return {{"n", n}, {"ade", ade}, {"alde", alde}, {"ape", ape}, {"mnre", mnre}};
}

void MetricReport::write_table_csv(std::ostream& out) const {
  out << "id,ground_truth,prediction,ade,alde,ape,mnre\n";
  out.precision(17);
  for (const auto& it : items) {
    out << csv_field(it.pair.id) << ',' << it.pair.ground_truth << ',' << it.pair.prediction << ','
        << it.metrics.ade << ',' << it.metrics.alde << ',' << it.metrics.ape << ',' << it.metrics.mnre << '\n';
  }
}

std::vector<EvalPair> read_pairs_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<EvalPair> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cols = split_csv(line);
    if (!header_seen) {
      if (cols.size() != 3 || cols[0] != "id" || cols[1] != "ground_truth" || cols[2] != "prediction")
        throw ValidationError("line " + std::to_string(line_no) + ": expected header 'id,ground_truth,prediction'");
      header_seen = true;
      continue;
    }
    if (cols.size() != 3)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 3 columns, found " +
                            std::to_string(cols.size()));
    out.push_back({cols[0], parse_number(cols[1], line_no, "ground_truth"),
                   parse_number(cols[2], line_no, "prediction")});
  }
  if (in.bad()) throw IoError("read failure on pairs CSV");
  if (!header_seen) throw ValidationError("pairs CSV is empty (missing header)");
  return out;
}

}  // namespace physfuse
