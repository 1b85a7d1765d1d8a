#pragma once

#include <map>
#include <string>
#include <vector>

#include "audit/catalog.hpp"
#include "audit/metrics.hpp"

namespace audit {

// One scored comparison against the anchor's reference list. profile is empty
// for plain sensitive rows and names the personality profile for the rows
// PAFS consumes. Excluded rows (refusals, unparseable completions) stay in
// the table for reporting but never enter a mean.
struct SimilarityRow {
  std::string anchor;
  std::string attribute;
  std::string value;
  std::string profile;
  Metric metric = Metric::kJaccard;
  int k = 0;
  double similarity = 0.0;
  bool excluded = false;
};

struct SimilarityTable {
  std::vector<SimilarityRow> rows;
};

enum class AggregationMode { kMeansThenDisparity, kPerAnchorDisparity };

std::string aggregation_mode_name(AggregationMode mode);
AggregationMode parse_aggregation_mode(const std::string& name);

struct AttributeStats {
  std::map<std::string, double> per_value_mean;
  double snsr = 0.0;
  double snsv = 0.0;
};

struct FairnessEntry {
  Metric metric = Metric::kJaccard;
  int k = 0;
  std::string attribute;
  AttributeStats stats;
};

struct FairnessSummary {
  std::vector<FairnessEntry> entries;       // registry order per (metric, k)
  std::vector<FairnessEntry> pafs_entries;  // keyed by the underlying metric
  AggregationMode mode = AggregationMode::kMeansThenDisparity;
};

// Mean over anchors of the non-excluded plain rows, per registry value.
// A value with no usable rows is a hard error naming it.
std::map<std::string, double> mean_similarity_per_value(
    const SimilarityTable& table, Metric metric, int k,
    const SensitiveAttribute& attribute);

// max − min of the per-value means (Sensitive-to-Neutral Similarity Range).
double snsr(const std::map<std::string, double>& means);

// Population standard deviation of the per-value means.
double snsv(const std::map<std::string, double>& means);

// 1 − mean absolute deviation; in [0.5, 1] for sims in [0,1], and 1 exactly
// when all sims agree.
double pafs(const std::vector<double>& sims_over_profiles);

// Disparity statistics for one attribute. kMeansThenDisparity applies
// snsr/snsv to the per-value means; kPerAnchorDisparity computes them per
// anchor (anchors missing a value are skipped) and averages.
AttributeStats aggregate_attribute(const SimilarityTable& table, Metric metric,
                                   int k, const SensitiveAttribute& attribute,
                                   AggregationMode mode);

// PAFS per (anchor, value) over the profile set, then aggregated exactly like
// a similarity: per-value means plus their snsr/snsv.
AttributeStats pafs_attribute_stats(const SimilarityTable& table, Metric metric,
                                    int k, const SensitiveAttribute& attribute,
                                    const std::vector<std::string>& profiles,
                                    AggregationMode mode);

FairnessSummary build_fairness_summary(
    const SimilarityTable& table, const std::vector<SensitiveAttribute>& registry,
    const std::vector<Metric>& metrics, int k,
    const std::vector<std::string>& profiles, AggregationMode mode);

// Descending SNSV, ties by attribute name ascending.
std::vector<std::string> rank_attributes_by_snsv(
    const std::map<std::string, double>& snsv_by_attribute);
std::vector<std::string> rank_attributes_by_snsv(const FairnessSummary& summary,
                                                 Metric metric, int k);

}  // namespace audit
