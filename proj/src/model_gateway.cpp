#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "audit/errors.hpp"
#include "audit/model_gateway.hpp"
#include "audit/util.hpp"

namespace audit {
namespace {

std::uint64_t chain(std::uint64_t state, const std::string& part) {
  state = fnv1a64(part, state);
  return fnv1a64("\x1f", state);  // field separator
}

// "https://host:port/path" → {"https://host:port", "/path"}
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint must be a full URL, got '" + url + "'");
  }
  size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

std::string provider_kind_name(ProviderKind kind) {
  return kind == ProviderKind::kMock ? "mock" : "live_http";
}

ProviderKind parse_provider_kind(const std::string& name) {
  if (name == "mock") return ProviderKind::kMock;
  if (name == "live_http") return ProviderKind::kLiveHttp;
  throw ConfigError("unknown provider kind '" + name +
                    "' (expected mock|live_http)");
}

struct ModelGateway::Impl {
  std::mutex flight_mutex;
  std::condition_variable flight_cv;
  int in_flight = 0;

  std::mutex rate_mutex;
  std::chrono::steady_clock::time_point next_slot =
      std::chrono::steady_clock::now();

  std::mutex log_mutex;
  std::ofstream index_out;
  std::ofstream request_log;

  std::atomic<std::uint64_t> temp_counter{0};
};

ModelGateway::ModelGateway(ProviderConfig provider,
                           std::optional<MockModelConfig> mock,
                           std::filesystem::path cache_dir)
    : provider_(std::move(provider)),
      mock_(std::move(mock)),
      cache_dir_(std::move(cache_dir)),
      impl_(std::make_unique<Impl>()) {
  if (provider_.provider_tag.empty()) {
    if (provider_.kind == ProviderKind::kMock && mock_) {
      // Fold the mock parameters into the tag so runs with different mock
      // setups never share cache entries.
      std::uint64_t fp = fnv1a64("mock-config");
      fp = fnv1a64(std::to_string(mock_->seed), fp);
      fp = fnv1a64(std::to_string(mock_->catalog_size), fp);
      fp = fnv1a64(format_fixed(mock_->bias_strength), fp);
      for (const auto& value : mock_->biased_values) {
        fp = fnv1a64(value, fp);
      }
      fp = fnv1a64(format_fixed(mock_->noise_temperature), fp);
      provider_.provider_tag = "mock-" + to_hex(fp);
    } else {
      provider_.provider_tag =
          provider_.kind == ProviderKind::kMock ? "mock" : "live";
    }
  }
  if (provider_.max_in_flight < 1) {
    throw ConfigError("max_in_flight must be >= 1");
  }
  if (provider_.kind == ProviderKind::kMock && !mock_) {
    throw ConfigError("mock provider selected without a mock model config");
  }
  if (provider_.kind == ProviderKind::kLiveHttp) {
    if (provider_.endpoint.empty()) {
      throw ConfigError("live provider needs an endpoint URL");
    }
    if (provider_.credential_env_var.empty()) {
      throw AuthError("live provider needs credential_env_var");
    }
    const char* credential = std::getenv(provider_.credential_env_var.c_str());
    if (credential == nullptr || *credential == '\0') {
      throw AuthError("credential environment variable '" +
                      provider_.credential_env_var + "' is not set");
    }
    credential_ = credential;
  }
  if (!cache_dir_.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir_ / "objects", ec);
    std::filesystem::create_directories(cache_dir_ / "tmp", ec);
    if (ec) {
      throw IoError("cannot create cache directory " + cache_dir_.string() +
                    ": " + ec.message());
    }
    impl_->index_out.open(cache_dir_ / "index.jsonl", std::ios::app);
    impl_->request_log.open(cache_dir_ / "request_log.jsonl", std::ios::app);
  }
}

ModelGateway::~ModelGateway() = default;

double ModelGateway::effective_temperature() const {
  return provider_.kind == ProviderKind::kMock ? mock_->noise_temperature
                                               : provider_.temperature;
}

std::string ModelGateway::cache_key(const PromptInstance& instance,
                                    int sample_index) const {
  std::uint64_t state = kFnvOffsetBasis;
  state = chain(state, provider_.provider_tag);
  state = chain(state, format_fixed(provider_.temperature));
  state = chain(state, format_fixed(provider_.top_p));
  state = chain(state, format_fixed(provider_.frequency_penalty));
  state = chain(state, instance.rendered_text);
  state = chain(state, std::to_string(sample_index));
  return to_hex(state);
}

std::optional<std::string> ModelGateway::cache_read(
    const std::string& key) const {
  if (cache_dir_.empty()) return std::nullopt;
  std::filesystem::path path =
      cache_dir_ / "objects" / key.substr(0, 2) / (key + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

void ModelGateway::cache_write(const std::string& key,
                               const PromptInstance& instance,
                               int sample_index, const std::string& text) {
  if (cache_dir_.empty()) return;
  std::filesystem::path shard = cache_dir_ / "objects" / key.substr(0, 2);
  std::error_code ec;
  std::filesystem::create_directories(shard, ec);
  std::filesystem::path temp =
      cache_dir_ / "tmp" /
      (key + "." + std::to_string(impl_->temp_counter.fetch_add(1)) + ".tmp");
  {
    std::ofstream out(temp, std::ios::binary);
    out << text;
    if (!out) throw IoError("cache write failed: " + temp.string());
  }
  std::filesystem::rename(temp, shard / (key + ".txt"), ec);
  if (ec) throw IoError("cache rename failed: " + ec.message());

  nlohmann::ordered_json entry;
  entry["key"] = key;
  entry["instance_id"] = instance.instance_id;
  entry["sample_index"] = sample_index;
  entry["provider_tag"] = provider_.provider_tag;
  std::lock_guard<std::mutex> lock(impl_->log_mutex);
  impl_->index_out << entry.dump() << '\n';
  impl_->index_out.flush();
}

void ModelGateway::log_request(const std::string& instance_id,
                               int sample_index, const std::string& status,
                               std::chrono::milliseconds latency) {
  if (cache_dir_.empty()) return;
  nlohmann::ordered_json entry;
  entry["timestamp"] = iso_utc_now();
  entry["instance_id"] = instance_id;
  entry["sample_index"] = sample_index;
  entry["status"] = status;
  entry["latency_ms"] = latency.count();
  std::lock_guard<std::mutex> lock(impl_->log_mutex);
  impl_->request_log << entry.dump() << '\n';
  impl_->request_log.flush();
}

std::string ModelGateway::live_complete(const std::string& rendered_text) {
  auto [base, path] = split_endpoint(provider_.endpoint);

  nlohmann::ordered_json body;
  body["contents"] = nlohmann::json::array(
      {{{"parts", nlohmann::json::array({{{"text", rendered_text}}})}}});
  auto& generation = body["generationConfig"];
  generation["temperature"] = provider_.temperature;
  generation["frequencyPenalty"] = provider_.frequency_penalty;
  if (provider_.top_p > 0.0 && provider_.top_p < 1.0) {
    generation["topP"] = provider_.top_p;
  }
  std::string payload = body.dump();

  SplitMix64 jitter(fnv1a64(rendered_text, fnv1a64("retry-jitter")));
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < provider_.retry.max_attempts; ++attempt) {
    if (attempt > 0) {
      auto backoff = provider_.retry.base_backoff * (1LL << (attempt - 1));
      auto jittered = backoff + std::chrono::milliseconds(static_cast<long>(
                                    backoff.count() * jitter.next_double()));
      std::this_thread::sleep_for(jittered);
    }

    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    httplib::Headers headers = {{"x-goog-api-key", credential_}};
    auto response = client.Post(path, headers, payload, "application/json");

    if (!response) {
      last_failure = "connection error: " + httplib::to_string(response.error());
      continue;
    }
    int status = response->status;
    if (status == 401 || status == 403) {
      throw AuthError("provider rejected credential (HTTP " +
                      std::to_string(status) + ")");
    }
    if (status == 429 || status >= 500) {
      last_failure = "HTTP " + std::to_string(status);
      continue;
    }
    if (status != 200) {
      throw ContentError("provider_error",
                         "provider returned HTTP " + std::to_string(status) +
                             ": " + response->body);
    }

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(response->body);
    } catch (const nlohmann::json::exception& e) {
      throw ContentError("bad_response",
                         std::string("unparseable provider response: ") +
                             e.what());
    }
    if (doc.contains("promptFeedback") &&
        doc["promptFeedback"].contains("blockReason")) {
      throw ContentError("refusal",
                         "prompt blocked: " +
                             doc["promptFeedback"]["blockReason"].dump());
    }
    if (!doc.contains("candidates") || !doc["candidates"].is_array() ||
        doc["candidates"].empty()) {
      throw ContentError("empty_body", "provider returned no candidates");
    }
    const auto& candidate = doc["candidates"][0];
    if (candidate.value("finishReason", "") == "SAFETY") {
      throw ContentError("refusal", "candidate blocked by safety filter");
    }
    std::string text;
    if (candidate.contains("content") &&
        candidate["content"].contains("parts")) {
      for (const auto& part : candidate["content"]["parts"]) {
        if (part.contains("text")) text += part["text"].get<std::string>();
      }
    }
    if (trim(text).empty()) {
      throw ContentError("empty_body", "provider returned an empty completion");
    }
    return text;
  }
  throw TransientProviderError("provider unreachable after " +
                               std::to_string(provider_.retry.max_attempts) +
                               " attempts (last: " + last_failure + ")");
}

std::string ModelGateway::provider_complete(const PromptInstance& instance,
                                            int sample_index) {
  if (provider_.kind == ProviderKind::kMock) {
    return mock_recommend(instance, *mock_, sample_index);
  }
  return live_complete(instance.rendered_text);
}

Completion ModelGateway::complete(const PromptInstance& instance,
                                  int sample_index) {
  if (sample_index < 0) throw ConfigError("sample_index must be >= 0");
  std::string key = cache_key(instance, sample_index);
  bool cacheable = !cache_dir_.empty() && sample_index == 0 &&
                   effective_temperature() == 0.0;

  Completion completion;
  completion.instance_id = instance.instance_id;
  completion.sample_index = sample_index;
  completion.provider_tag = provider_.provider_tag;

  if (cacheable) {
    if (auto cached = cache_read(key)) {
      completion.raw_text = std::move(*cached);
      completion.from_cache = true;
      log_request(instance.instance_id, sample_index, "cache_hit",
                  std::chrono::milliseconds(0));
      return completion;
    }
  }

  if (provider_.rate_limit > 0.0) {
    std::chrono::steady_clock::time_point wake;
    {
      std::lock_guard<std::mutex> lock(impl_->rate_mutex);
      auto now = std::chrono::steady_clock::now();
      wake = std::max(now, impl_->next_slot);
      impl_->next_slot =
          wake + std::chrono::microseconds(
                     static_cast<long>(1e6 / provider_.rate_limit));
    }
    std::this_thread::sleep_until(wake);
  }

  {
    std::unique_lock<std::mutex> lock(impl_->flight_mutex);
    impl_->flight_cv.wait(
        lock, [&] { return impl_->in_flight < provider_.max_in_flight; });
    ++impl_->in_flight;
  }
  auto release = [&] {
    std::lock_guard<std::mutex> lock(impl_->flight_mutex);
    --impl_->in_flight;
    impl_->flight_cv.notify_one();
  };

  auto started = std::chrono::steady_clock::now();
  try {
    completion.raw_text = provider_complete(instance, sample_index);
  } catch (const ContentError&) {
    release();
    log_request(instance.instance_id, sample_index, "content_error",
                std::chrono::milliseconds(0));
    throw;
  } catch (...) {
    release();
    log_request(instance.instance_id, sample_index, "error",
                std::chrono::milliseconds(0));
    throw;
  }
  completion.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  release();

  log_request(instance.instance_id, sample_index, "ok", completion.latency);
  if (cacheable) cache_write(key, instance, sample_index, completion.raw_text);
  return completion;
}

SampleSetResult ModelGateway::sample_n(const PromptInstance& instance, int n) {
  if (n < 1) throw ConfigError("sample_n needs n >= 1");
  SampleSetResult result;
  for (int sample = 0; sample < n; ++sample) {
    try {
      result.completions.push_back(complete(instance, sample));
    } catch (const ContentError& e) {
      result.content_errors.push_back({sample, e.kind(), e.what()});
    }
  }
  return result;
}

}  // namespace audit
