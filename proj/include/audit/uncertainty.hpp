#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audit/parser.hpp"

namespace audit {

struct SampleSet {
  std::string instance_id;
  std::vector<RankedList> lists;  // n ≥ 1, all with the same k_requested
};

struct EntropyReport {
  int n = 0;
  int distinct_items = 0;
  double entropy_nats = 0.0;
  double normalized_entropy = 0.0;  // entropy / ln(distinct), 0 when distinct < 2
  // Absent when n == 1 — a single sample has no pair statistics.
  std::optional<double> exact_match_rate;
  std::optional<double> mean_pairwise_jaccard;
  bool degenerate = false;  // n == 1
};

// q(item) = fraction of occurrence mass: lists containing the item, normalized
// over all distinct items. Errors when every list is empty.
std::map<std::string, double> item_frequency_distribution(
    const SampleSet& samples);

EntropyReport predictive_entropy(const SampleSet& samples);

struct CorrelationSummary {
  double spearman = 0.0;
  int pairs = 0;
  // (label, instability, reliability score) — the pairing manifest.
  std::vector<std::tuple<std::string, double, double>> pairing;
};

// Spearman rank correlation (average ranks on ties) between instability
// (1 − mean_pairwise_jaccard) and the given reliability score, joined by
// label. Degenerate reports are skipped; needs ≥3 joined pairs.
CorrelationSummary entropy_reliability_join(
    const std::vector<std::pair<std::string, EntropyReport>>& reports,
    const std::map<std::string, double>& reliability_scores);

}  // namespace audit
