#include "audit/fairness.hpp"

#include <algorithm>
#include <cmath>

#include "audit/errors.hpp"

namespace audit {
namespace {

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// sims per (anchor → value → list) for one (metric, k, attribute) slice.
using AnchorValueSims =
    std::map<std::string, std::map<std::string, std::vector<double>>>;

AnchorValueSims collect_plain(const SimilarityTable& table, Metric metric,
                              int k, const SensitiveAttribute& attribute) {
  AnchorValueSims collected;
  for (const auto& row : table.rows) {
    if (row.excluded || row.metric != metric || row.k != k ||
        row.attribute != attribute.name || !row.profile.empty()) {
      continue;
    }
    collected[row.anchor][row.value].push_back(row.similarity);
  }
  return collected;
}

std::map<std::string, double> value_means(
    const AnchorValueSims& collected, const SensitiveAttribute& attribute) {
  std::map<std::string, double> means;
  for (const auto& value : attribute.values) {
    double sum = 0.0;
    size_t count = 0;
    for (const auto& [anchor, by_value] : collected) {
      auto it = by_value.find(value);
      if (it == by_value.end()) continue;
      for (double sim : it->second) {
        sum += sim;
        ++count;
      }
    }
    if (count == 0) {
      throw AggregationError("no usable similarities for value '" + value +
                             "' of attribute '" + attribute.name + "'");
    }
    means[value] = sum / static_cast<double>(count);
  }
  return means;
}

AttributeStats disparity_from(const AnchorValueSims& collected,
                              const SensitiveAttribute& attribute,
                              AggregationMode mode) {
  AttributeStats stats;
  stats.per_value_mean = value_means(collected, attribute);
  if (mode == AggregationMode::kMeansThenDisparity) {
    stats.snsr = snsr(stats.per_value_mean);
    stats.snsv = snsv(stats.per_value_mean);
    return stats;
  }

  std::vector<double> ranges;
  std::vector<double> deviations;
  for (const auto& [anchor, by_value] : collected) {
    std::map<std::string, double> anchor_means;
    for (const auto& value : attribute.values) {
      auto it = by_value.find(value);
      if (it != by_value.end()) anchor_means[value] = mean_of(it->second);
    }
    if (anchor_means.size() < 2) continue;
    ranges.push_back(snsr(anchor_means));
    deviations.push_back(snsv(anchor_means));
  }
  if (ranges.empty()) {
    throw AggregationError(
        "no anchor with >=2 values for per-anchor disparity on attribute '" +
        attribute.name + "'");
  }
  stats.snsr = mean_of(ranges);
  stats.snsv = mean_of(deviations);
  return stats;
}

}  // namespace

std::string aggregation_mode_name(AggregationMode mode) {
  return mode == AggregationMode::kMeansThenDisparity ? "means_then_disparity"
                                                      : "per_anchor_disparity";
}

AggregationMode parse_aggregation_mode(const std::string& name) {
  if (name == "means_then_disparity") {
    return AggregationMode::kMeansThenDisparity;
  }
  if (name == "per_anchor_disparity") {
    return AggregationMode::kPerAnchorDisparity;
  }
  throw ConfigError("unknown aggregation_mode '" + name +
                    "' (expected means_then_disparity|per_anchor_disparity)");
}

std::map<std::string, double> mean_similarity_per_value(
    const SimilarityTable& table, Metric metric, int k,
    const SensitiveAttribute& attribute) {
  return value_means(collect_plain(table, metric, k, attribute), attribute);
}

double snsr(const std::map<std::string, double>& means) {
  if (means.size() < 2) {
    throw AggregationError("snsr needs >= 2 value means, has " +
                           std::to_string(means.size()));
  }
  double lo = means.begin()->second;
  double hi = lo;
  for (const auto& [value, mean] : means) {
    lo = std::min(lo, mean);
    hi = std::max(hi, mean);
  }
  return hi - lo;
}

double snsv(const std::map<std::string, double>& means) {
  if (means.size() < 2) {
    throw AggregationError("snsv needs >= 2 value means, has " +
                           std::to_string(means.size()));
  }
  double mean = 0.0;
  for (const auto& [value, m] : means) mean += m;
  mean /= static_cast<double>(means.size());
  double variance = 0.0;
  for (const auto& [value, m] : means) variance += (m - mean) * (m - mean);
  variance /= static_cast<double>(means.size());
  return std::sqrt(variance);
}

double pafs(const std::vector<double>& sims_over_profiles) {
  if (sims_over_profiles.empty()) {
    throw AggregationError("pafs needs >= 1 profile similarity");
  }
  double mean = mean_of(sims_over_profiles);
  double mad = 0.0;
  for (double sim : sims_over_profiles) mad += std::abs(sim - mean);
  mad /= static_cast<double>(sims_over_profiles.size());
  return 1.0 - mad;
}

AttributeStats aggregate_attribute(const SimilarityTable& table, Metric metric,
                                   int k, const SensitiveAttribute& attribute,
                                   AggregationMode mode) {
  return disparity_from(collect_plain(table, metric, k, attribute), attribute,
                        mode);
}

AttributeStats pafs_attribute_stats(const SimilarityTable& table, Metric metric,
                                    int k, const SensitiveAttribute& attribute,
                                    const std::vector<std::string>& profiles,
                                    AggregationMode mode) {
  // anchor → value → profile → sim
  std::map<std::string, std::map<std::string, std::map<std::string, double>>>
      collected;
  for (const auto& row : table.rows) {
    if (row.excluded || row.metric != metric || row.k != k ||
        row.attribute != attribute.name || row.profile.empty()) {
      continue;
    }
    collected[row.anchor][row.value][row.profile] = row.similarity;
  }

  AnchorValueSims pafs_scores;
  for (const auto& [anchor, by_value] : collected) {
    for (const auto& [value, by_profile] : by_value) {
      std::vector<double> sims;
      for (const auto& profile : profiles) {
        auto it = by_profile.find(profile);
        if (it != by_profile.end()) sims.push_back(it->second);
      }
      if (sims.empty()) continue;
      pafs_scores[anchor][value].push_back(pafs(sims));
    }
  }
  return disparity_from(pafs_scores, attribute, mode);
}

FairnessSummary build_fairness_summary(
    const SimilarityTable& table,
    const std::vector<SensitiveAttribute>& registry,
    const std::vector<Metric>& metrics, int k,
    const std::vector<std::string>& profiles, AggregationMode mode) {
  FairnessSummary summary;
  summary.mode = mode;
  for (Metric metric : metrics) {
    for (const auto& attribute : registry) {
      FairnessEntry entry;
      entry.metric = metric;
      entry.k = k;
      entry.attribute = attribute.name;
      entry.stats = aggregate_attribute(table, metric, k, attribute, mode);
      summary.entries.push_back(std::move(entry));
    }
    if (!profiles.empty()) {
      for (const auto& attribute : registry) {
        FairnessEntry entry;
        entry.metric = metric;
        entry.k = k;
        entry.attribute = attribute.name;
        entry.stats =
            pafs_attribute_stats(table, metric, k, attribute, profiles, mode);
        summary.pafs_entries.push_back(std::move(entry));
      }
    }
  }
  return summary;
}

std::vector<std::string> rank_attributes_by_snsv(
    const std::map<std::string, double>& snsv_by_attribute) {
  std::vector<std::pair<std::string, double>> items(snsv_by_attribute.begin(),
                                                    snsv_by_attribute.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<std::string> names;
  names.reserve(items.size());
  for (const auto& [name, value] : items) names.push_back(name);
  return names;
}

std::vector<std::string> rank_attributes_by_snsv(const FairnessSummary& summary,
                                                 Metric metric, int k) {
  std::map<std::string, double> snsv_by_attribute;
  for (const auto& entry : summary.entries) {
    if (entry.metric == metric && entry.k == k) {
      snsv_by_attribute[entry.attribute] = entry.stats.snsv;
    }
  }
  return rank_attributes_by_snsv(snsv_by_attribute);
}

}  // namespace audit
