#pragma once

#include <optional>
#include <string>
#include <vector>

#include "audit/parser.hpp"

namespace audit {

enum class Metric { kJaccard, kSerpStar, kPragStar };

inline constexpr Metric kAllMetrics[] = {Metric::kJaccard, Metric::kSerpStar,
                                         Metric::kPragStar};

std::string metric_name(Metric metric);
Metric parse_metric(const std::string& name);

struct SimilarityScore {
  Metric metric = Metric::kJaccard;
  int k = 0;
  double value = 0.0;  // always in [0,1]
};

// Set overlap |A∩B| / |A∪B| of the two top-k truncations. Both truncations
// empty → 1. Symmetric.
double jaccard_at_k(const RankedList& reference, const RankedList& candidate,
                    int k);

// Rank-weighted overlap: shared items contribute (m − rank_ref + 1) with
// 1-based ranks, normalized by m(m+1)/2 where m is the reference truncation
// length; identical lists score 1 even when shorter than k. Asymmetric.
double serp_star_at_k(const RankedList& reference, const RankedList& candidate,
                      int k);

// Pairwise rank agreement: over reference-ordered pairs (v1, v2), counts
// those where v1 is in the candidate truncation and either v2 is absent or
// v1 still precedes it; normalized by m(m−1)/2. Undefined (nullopt, not 0)
// when the reference truncation has fewer than 2 items. Asymmetric.
std::optional<double> prag_star_at_k(const RankedList& reference,
                                     const RankedList& candidate, int k);

// Dispatch by enum; nullopt only for an undefined PRAG*.
std::optional<double> similarity_at_k(Metric metric, const RankedList& reference,
                                      const RankedList& candidate, int k);

// One score per (metric, k) over prefix truncations; undefined PRAG* entries
// are skipped. ks must be non-empty and ascending.
std::vector<SimilarityScore> k_sweep(const RankedList& reference,
                                     const RankedList& candidate,
                                     const std::vector<int>& ks,
                                     const std::vector<Metric>& metrics = {
                                         Metric::kJaccard, Metric::kSerpStar,
                                         Metric::kPragStar});

}  // namespace audit
