#include "audit/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "audit/errors.hpp"
#include "audit/metrics.hpp"

namespace audit {
namespace {

// 1-based ranks, ties averaged.
std::vector<double> average_ranks(const std::vector<double>& values) {
  size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t p = i; p <= j; ++p) ranks[order[p]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  double n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0.0 || vy == 0.0) {
    throw AggregationError("rank correlation undefined on a constant series");
  }
  return cov / std::sqrt(vx * vy);
}

}  // namespace

std::map<std::string, double> item_frequency_distribution(
    const SampleSet& samples) {
  if (samples.lists.empty()) {
    throw AggregationError("item distribution needs >= 1 sample");
  }
  std::map<std::string, double> counts;
  double total = 0.0;
  for (const auto& list : samples.lists) {
    for (const auto& item : list.items) {
      counts[item] += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) {
    throw AggregationError("item distribution undefined: every sample empty");
  }
  for (auto& [item, count] : counts) count /= total;
  return counts;
}

EntropyReport predictive_entropy(const SampleSet& samples) {
  auto distribution = item_frequency_distribution(samples);

  EntropyReport report;
  report.n = static_cast<int>(samples.lists.size());
  report.distinct_items = static_cast<int>(distribution.size());
  for (const auto& [item, q] : distribution) {
    report.entropy_nats -= q * std::log(q);
  }
  report.normalized_entropy =
      report.distinct_items >= 2
          ? report.entropy_nats / std::log(report.distinct_items)
          : 0.0;

  if (report.n == 1) {
    report.degenerate = true;
    return report;
  }

  int k = samples.lists.front().k_requested;
  double matches = 0.0, jaccard_sum = 0.0, pair_count = 0.0;
  for (size_t i = 0; i < samples.lists.size(); ++i) {
    for (size_t j = i + 1; j < samples.lists.size(); ++j) {
      matches += samples.lists[i].items == samples.lists[j].items ? 1.0 : 0.0;
      jaccard_sum += jaccard_at_k(samples.lists[i], samples.lists[j], k);
      pair_count += 1.0;
    }
  }
  report.exact_match_rate = matches / pair_count;
  report.mean_pairwise_jaccard = jaccard_sum / pair_count;
  return report;
}

CorrelationSummary entropy_reliability_join(
    const std::vector<std::pair<std::string, EntropyReport>>& reports,
    const std::map<std::string, double>& reliability_scores) {
  CorrelationSummary summary;
  std::vector<double> instability, reliability;
  for (const auto& [label, report] : reports) {
    if (report.degenerate || !report.mean_pairwise_jaccard) continue;
    auto it = reliability_scores.find(label);
    if (it == reliability_scores.end()) continue;
    double unstable = 1.0 - *report.mean_pairwise_jaccard;
    summary.pairing.emplace_back(label, unstable, it->second);
    instability.push_back(unstable);
    reliability.push_back(it->second);
  }
  summary.pairs = static_cast<int>(summary.pairing.size());
  if (summary.pairs < 3) {
    throw AggregationError("entropy/reliability join needs >= 3 pairs, has " +
                           std::to_string(summary.pairs));
  }
  summary.spearman =
      pearson(average_ranks(instability), average_ranks(reliability));
  return summary;
}

}  // namespace audit
