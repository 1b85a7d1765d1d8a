#include "audit/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "audit/errors.hpp"

namespace audit {
namespace {

size_t truncated_len(const RankedList& list, int k) {
  return std::min(list.items.size(), static_cast<size_t>(k));
}

// item → 1-based rank within the top-k truncation
std::unordered_map<std::string, int> rank_map(const RankedList& list, int k) {
  std::unordered_map<std::string, int> ranks;
  size_t n = truncated_len(list, k);
  for (size_t i = 0; i < n; ++i) {
    ranks.emplace(list.items[i], static_cast<int>(i) + 1);
  }
  return ranks;
}

}  // namespace

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::kJaccard: return "jaccard";
    case Metric::kSerpStar: return "serp_star";
    case Metric::kPragStar: return "prag_star";
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  if (name == "jaccard") return Metric::kJaccard;
  if (name == "serp_star") return Metric::kSerpStar;
  if (name == "prag_star") return Metric::kPragStar;
  throw ConfigError("unknown metric '" + name +
                    "' (expected jaccard|serp_star|prag_star)");
}

double jaccard_at_k(const RankedList& reference, const RankedList& candidate,
                    int k) {
  if (k < 1) throw ConfigError("jaccard_at_k needs k >= 1");
  size_t ref_n = truncated_len(reference, k);
  size_t cand_n = truncated_len(candidate, k);
  if (ref_n == 0 && cand_n == 0) return 1.0;

  std::unordered_set<std::string> ref_set(reference.items.begin(),
                                          reference.items.begin() + ref_n);
  size_t shared = 0;
  for (size_t i = 0; i < cand_n; ++i) {
    if (ref_set.count(candidate.items[i])) ++shared;
  }
  size_t unions = ref_n + cand_n - shared;
  return static_cast<double>(shared) / static_cast<double>(unions);
}

double serp_star_at_k(const RankedList& reference, const RankedList& candidate,
                      int k) {
  if (k < 1) throw ConfigError("serp_star_at_k needs k >= 1");
  size_t m = truncated_len(reference, k);
  size_t cand_n = truncated_len(candidate, k);
  if (m == 0) return cand_n == 0 ? 1.0 : 0.0;

  std::unordered_set<std::string> cand_set(candidate.items.begin(),
                                           candidate.items.begin() + cand_n);
  double sum = 0.0;
  for (size_t i = 0; i < m; ++i) {
    if (cand_set.count(reference.items[i])) {
      sum += static_cast<double>(m - i);  // m − rank + 1 with rank = i+1
    }
  }
  double denom = static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
  return sum / denom;
}

std::optional<double> prag_star_at_k(const RankedList& reference,
                                     const RankedList& candidate, int k) {
  if (k < 1) throw ConfigError("prag_star_at_k needs k >= 1");
  size_t m = truncated_len(reference, k);
  if (m < 2) return std::nullopt;

  auto cand_rank = rank_map(candidate, k);
  size_t agreeing = 0;
  for (size_t i = 0; i < m; ++i) {
    auto first = cand_rank.find(reference.items[i]);
    if (first == cand_rank.end()) continue;
    for (size_t j = i + 1; j < m; ++j) {
      auto second = cand_rank.find(reference.items[j]);
      if (second == cand_rank.end() || first->second < second->second) {
        ++agreeing;
      }
    }
  }
  double denom = static_cast<double>(m) * static_cast<double>(m - 1) / 2.0;
  return static_cast<double>(agreeing) / denom;
}

std::optional<double> similarity_at_k(Metric metric,
                                      const RankedList& reference,
                                      const RankedList& candidate, int k) {
  switch (metric) {
    case Metric::kJaccard: return jaccard_at_k(reference, candidate, k);
    case Metric::kSerpStar: return serp_star_at_k(reference, candidate, k);
    case Metric::kPragStar: return prag_star_at_k(reference, candidate, k);
  }
  return std::nullopt;
}

std::vector<SimilarityScore> k_sweep(const RankedList& reference,
                                     const RankedList& candidate,
                                     const std::vector<int>& ks,
                                     const std::vector<Metric>& metrics) {
  if (ks.empty()) throw ConfigError("k_sweep needs a non-empty k list");
  if (!std::is_sorted(ks.begin(), ks.end())) {
    throw ConfigError("k_sweep k list must be ascending");
  }
  std::vector<SimilarityScore> scores;
  for (Metric metric : metrics) {
    for (int k : ks) {
      auto value = similarity_at_k(metric, reference, candidate, k);
      if (value) scores.push_back({metric, k, *value});
    }
  }
  return scores;
}

}  // namespace audit
