#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "audit/prompt_engine.hpp"

namespace audit {

enum class ProviderKind { kMock, kLiveHttp };

std::string provider_kind_name(ProviderKind kind);
ProviderKind parse_provider_kind(const std::string& name);

struct RetryConfig {
  int max_attempts = 5;
  std::chrono::milliseconds base_backoff{100};
};

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kMock;
  std::string endpoint;            // live only, full URL
  std::string credential_env_var;  // live only
  // Greedy decoding by default: temperature 0, top_p disabled, no penalty.
  double temperature = 0.0;
  double top_p = 1.0;  // ≥1 (or ≤0) means "disabled", omitted from requests
  double frequency_penalty = 0.0;
  int max_in_flight = 4;
  RetryConfig retry;
  double rate_limit = 0.0;  // requests/second; ≤0 means unlimited
  std::string provider_tag;  // cache-key namespace; defaults per kind
};

struct MockModelConfig {
  std::uint64_t seed = 0;
  int catalog_size = 100000;
  double bias_strength = 0.0;  // β in [0,1]
  std::set<std::string> biased_values;
  double noise_temperature = 0.0;
};

struct Completion {
  std::string instance_id;
  int sample_index = 0;
  std::string raw_text;
  std::chrono::milliseconds latency{0};
  bool from_cache = false;
  std::string provider_tag;
};

// One content-level failure inside a sample set; the run continues past it.
struct ContentFailure {
  int sample_index = 0;
  std::string kind;
  std::string message;
};

struct SampleSetResult {
  std::vector<Completion> completions;
  std::vector<ContentFailure> content_errors;
};

// Deterministic offline recommender. Emits "1. Item 00042"-style numbered
// lines from a permutation keyed by (seed, anchor); conditions whose value is
// in biased_values get a β-fraction of positions swapped to a value-specific
// disjoint sub-catalog; noise_temperature > 0 swaps floor(t·k/2) positions to
// noise titles, differently per sample_index.
std::string mock_recommend(const PromptInstance& instance,
                           const MockModelConfig& config, int sample_index);

// Dispatch layer shared by all workers: disk cache, token-bucket rate limit,
// bounded in-flight requests, retry with exponential backoff, and the
// Gemini-style HTTP adapter. Thread-safe.
class ModelGateway {
 public:
  // cache_dir may be empty to disable the disk cache (unit tests).
  ModelGateway(ProviderConfig provider, std::optional<MockModelConfig> mock,
               std::filesystem::path cache_dir);
  ~ModelGateway();

  ModelGateway(const ModelGateway&) = delete;
  ModelGateway& operator=(const ModelGateway&) = delete;

  Completion complete(const PromptInstance& instance, int sample_index);

  // n completions with sample_index 0..n−1. Content errors are annotated and
  // returned alongside the successful samples; fatal errors propagate.
  SampleSetResult sample_n(const PromptInstance& instance, int n);

  std::string cache_key(const PromptInstance& instance, int sample_index) const;

  const ProviderConfig& provider() const { return provider_; }

  // temperature for cache-eligibility decisions; the mock's randomness knob
  // is its noise_temperature.
  double effective_temperature() const;

 private:
  struct Impl;

  std::string provider_complete(const PromptInstance& instance,
                                int sample_index);
  std::string live_complete(const std::string& rendered_text);
  std::optional<std::string> cache_read(const std::string& key) const;
  void cache_write(const std::string& key, const PromptInstance& instance,
                   int sample_index, const std::string& text);
  void log_request(const std::string& instance_id, int sample_index,
                   const std::string& status,
                   std::chrono::milliseconds latency);

  ProviderConfig provider_;
  std::optional<MockModelConfig> mock_;
  std::filesystem::path cache_dir_;
  std::string credential_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace audit
