#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace physfuse {

/// Error between a ground truth m and a prediction m_hat (both positive).
struct ItemMetrics {
  double ade = 0.0;   // |m - m_hat|
  double alde = 0.0;  // |ln m - ln m_hat|
  double ape = 0.0;   // |(m - m_hat) / m|
  double mnre = 0.0;  // min(m/m_hat, m_hat/m)
};

/// Throws DomainError unless both inputs are positive and finite.
ItemMetrics metrics(double m, double m_hat);

struct EvalPair {
  std::string id;
  double ground_truth = 0.0;
  double prediction = 0.0;
};

struct MetricItem {
  EvalPair pair;
  ItemMetrics metrics;
};

struct MetricReport {
  double ade = 0.0;
  double alde = 0.0;
  double ape = 0.0;
  double mnre = 0.0;
  std::size_t n = 0;
  std::vector<MetricItem> items;  // input order

  [[nodiscard]] nlohmann::json summary_json() const;
  void write_table_csv(std::ostream& out) const;
};

/// Unweighted means of the per-item metrics. Throws DomainError on an empty
/// list or a nonpositive value (naming the item).
MetricReport evaluate(std::span<const EvalPair> pairs);

/// Reads `id,ground_truth,prediction` CSV. Throws ValidationError with the
/// line number on malformed rows.
std::vector<EvalPair> read_pairs_csv(std::istream& in);

}  // namespace physfuse
