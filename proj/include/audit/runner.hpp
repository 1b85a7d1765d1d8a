#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audit/fairness.hpp"
#include "audit/model_gateway.hpp"

namespace audit {

inline constexpr const char* kVersionTag = "0.1.0";

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kTypo;
  std::vector<std::string> values;       // typo scope; empty → all values
  TranslationTable translation_overrides;  // translate only
};

struct RunConfig {
  Domain domain = Domain::kMusic;
  std::filesystem::path anchors_path;
  std::optional<std::filesystem::path> attribute_overrides_path;
  // Restricts the audit to these registry attributes (the full registry is
  // the default).
  std::optional<std::vector<std::string>> attributes;
  // Absent → the built-in Big Five set; empty → personality probing disabled.
  std::optional<std::vector<std::string>> personality_profiles;
  int k = 25;
  std::vector<int> ks_sweep;
  std::vector<Metric> metrics = {Metric::kJaccard, Metric::kSerpStar,
                                 Metric::kPragStar};
  ProviderConfig provider;
  MockModelConfig mock;
  std::vector<PerturbationSpec> perturbations;
  int samples_n = 1;  // >1 turns on the uncertainty report
  AggregationMode aggregation_mode = AggregationMode::kMeansThenDisparity;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;
};

struct RunOverrides {
  std::optional<std::string> provider_kind;
  std::optional<int> k;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::string> domain;
};

RunConfig load_run_config(const std::filesystem::path& path);
void apply_overrides(RunConfig& config, const RunOverrides& overrides);
void validate_run_config(const RunConfig& config);

struct RunResult {
  std::filesystem::path output_dir;
  int instances = 0;
  int excluded_rows = 0;
  std::map<std::string, int> content_error_counts;  // by kind
  FairnessSummary summary;
};

// Full pipeline: enumerate → dispatch → parse → score → aggregate → write the
// report bundle. Nothing is written until every stage has succeeded, so a
// fatal error leaves no partial outputs.
RunResult run_audit(const RunConfig& config);

}  // namespace audit
