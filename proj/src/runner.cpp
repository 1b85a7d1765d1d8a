#include "audit/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "audit/csv.hpp"
#include "audit/errors.hpp"
#include "audit/parser.hpp"
#include "audit/uncertainty.hpp"
#include "audit/util.hpp"

namespace audit {
namespace {

using nlohmann::ordered_json;

std::filesystem::path resolve_relative(const std::filesystem::path& base,
                                       const std::filesystem::path& path) {
  if (path.empty() || path.is_absolute()) return path;
  return base / path;
}

std::string condition_kind_name(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::kNeutral: return "neutral";
    case ConditionKind::kSensitive: return "sensitive";
    case ConditionKind::kPersonality: return "personality";
    case ConditionKind::kIntersectional: return "intersectional";
  }
  return "?";
}

std::string perturbation_kind_name(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kNone: return "none";
    case PerturbationKind::kTypo: return "typo";
    case PerturbationKind::kTranslate: return "translate";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// config

template <typename T>
const nlohmann::json& require_field(const T& doc, const char* name) {
  if (!doc.contains(name)) {
    throw ConfigError(std::string("config is missing required field '") +
                      name + "'");
  }
  return doc.at(name);
}

ProviderConfig parse_provider(const nlohmann::json& doc) {
  ProviderConfig provider;
  if (doc.contains("kind")) {
    provider.kind = parse_provider_kind(doc["kind"].get<std::string>());
  }
  provider.endpoint = doc.value("endpoint", provider.endpoint);
  provider.credential_env_var =
      doc.value("credential_env_var", provider.credential_env_var);
  provider.temperature = doc.value("temperature", provider.temperature);
  provider.top_p = doc.value("top_p", provider.top_p);
  provider.frequency_penalty =
      doc.value("frequency_penalty", provider.frequency_penalty);
  provider.max_in_flight = doc.value("max_in_flight", provider.max_in_flight);
  if (doc.contains("retry")) {
    const auto& retry = doc["retry"];
    provider.retry.max_attempts =
        retry.value("max_attempts", provider.retry.max_attempts);
    provider.retry.base_backoff = std::chrono::milliseconds(
        retry.value("base_backoff_ms",
                    static_cast<int>(provider.retry.base_backoff.count())));
  }
  provider.rate_limit = doc.value("rate_limit", provider.rate_limit);
  provider.provider_tag = doc.value("provider_tag", provider.provider_tag);
  return provider;
}

MockModelConfig parse_mock(const nlohmann::json& doc, std::uint64_t run_seed) {
  MockModelConfig mock;
  mock.seed = doc.value("seed", run_seed);
  mock.catalog_size = doc.value("catalog_size", mock.catalog_size);
  mock.bias_strength = doc.value("bias_strength", mock.bias_strength);
  if (doc.contains("biased_values")) {
    for (const auto& value : doc["biased_values"]) {
      mock.biased_values.insert(value.get<std::string>());
    }
  }
  mock.noise_temperature =
      doc.value("noise_temperature", mock.noise_temperature);
  return mock;
}

std::vector<PerturbationSpec> parse_perturbations(const nlohmann::json& doc) {
  std::vector<PerturbationSpec> specs;
  for (const auto& entry : doc) {
    PerturbationSpec spec;
    std::string kind = require_field(entry, "kind").get<std::string>();
    if (kind == "typo") {
      spec.kind = PerturbationKind::kTypo;
      if (entry.contains("values")) {
        for (const auto& value : entry["values"]) {
          spec.values.push_back(value.get<std::string>());
        }
      }
    } else if (kind == "translate") {
      spec.kind = PerturbationKind::kTranslate;
      std::string language = entry.value("language", "fr");
      if (language != "fr") {
        throw ConfigError("translate perturbation supports only 'fr', got '" +
                          language + "'");
      }
      if (entry.contains("table")) {
        for (auto it = entry["table"].begin(); it != entry["table"].end();
             ++it) {
          spec.translation_overrides[it.key()] =
              it.value().get<std::string>();
        }
      }
    } else {
      throw ConfigError("unknown perturbation kind '" + kind +
                        "' (expected typo|translate)");
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

ordered_json config_snapshot(const RunConfig& config) {
  ordered_json doc;
  doc["domain"] = domain_name(config.domain);
  doc["anchors_path"] = config.anchors_path.string();
  doc["attribute_overrides_path"] =
      config.attribute_overrides_path
          ? ordered_json(config.attribute_overrides_path->string())
          : ordered_json(nullptr);
  doc["attributes"] = config.attributes ? ordered_json(*config.attributes)
                                        : ordered_json(nullptr);
  doc["personality_profiles"] =
      config.personality_profiles ? ordered_json(*config.personality_profiles)
                                  : ordered_json(nullptr);
  doc["k"] = config.k;
  doc["ks_sweep"] = config.ks_sweep;
  std::vector<std::string> metric_names;
  for (Metric metric : config.metrics) metric_names.push_back(metric_name(metric));
  doc["metrics"] = metric_names;

  ordered_json provider;
  provider["kind"] = provider_kind_name(config.provider.kind);
  provider["endpoint"] = config.provider.endpoint;
  provider["credential_env_var"] = config.provider.credential_env_var;
  provider["temperature"] = config.provider.temperature;
  provider["top_p"] = config.provider.top_p;
  provider["frequency_penalty"] = config.provider.frequency_penalty;
  provider["max_in_flight"] = config.provider.max_in_flight;
  provider["retry"] = {
      {"max_attempts", config.provider.retry.max_attempts},
      {"base_backoff_ms", config.provider.retry.base_backoff.count()}};
  provider["rate_limit"] = config.provider.rate_limit;
  provider["provider_tag"] = config.provider.provider_tag;
  doc["provider"] = std::move(provider);

  ordered_json mock;
  mock["seed"] = config.mock.seed;
  mock["catalog_size"] = config.mock.catalog_size;
  mock["bias_strength"] = config.mock.bias_strength;
  mock["biased_values"] = config.mock.biased_values;
  mock["noise_temperature"] = config.mock.noise_temperature;
  doc["mock"] = std::move(mock);

  ordered_json perturbations = ordered_json::array();
  for (const auto& spec : config.perturbations) {
    ordered_json entry;
    entry["kind"] = perturbation_kind_name(spec.kind);
    if (spec.kind == PerturbationKind::kTypo) {
      entry["values"] = spec.values;
    } else {
      entry["language"] = "fr";
      entry["table"] = spec.translation_overrides;
    }
    perturbations.push_back(std::move(entry));
  }
  doc["perturbations"] = std::move(perturbations);

  doc["samples_n"] = config.samples_n;
  doc["aggregation_mode"] = aggregation_mode_name(config.aggregation_mode);
  doc["seed"] = config.seed;
  doc["output_dir"] = config.output_dir.string();
  doc["cache_dir"] = config.cache_dir.string();
  return doc;
}

// ---------------------------------------------------------------------------
// pipeline pieces

struct Outcome {
  std::optional<RankedList> primary;  // parsed sample 0
  std::vector<RankedList> lists;      // every parsed sample, in sample order
  std::vector<ContentFailure> failures;
};

struct VariantSlot {
  std::string attribute;
  std::string base_value;
  std::string label;          // "typo_delete" / "typo_duplicate" / "fr"
  std::string variant_value;  // the misspelled or translated value
  Language language = Language::kEn;
  const Outcome* outcome = nullptr;
};

struct AnchorData {
  std::string name;
  const Outcome* neutral_en = nullptr;
  const Outcome* neutral_fr = nullptr;
  std::vector<std::tuple<std::string, std::string, const Outcome*>> values;
  std::vector<std::pair<std::string, const Outcome*>> profiles;
  std::vector<VariantSlot> variants;
};

struct ScoredVariant {
  std::string anchor;
  std::string attribute;
  std::string value;  // the unperturbed registry value
  std::string label;
  std::string variant_value;
  Metric metric = Metric::kJaccard;
  double similarity = 0.0;
  bool excluded = false;
};

const RankedList* primary_of(const Outcome* outcome) {
  return outcome != nullptr && outcome->primary ? &*outcome->primary : nullptr;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

  RunConfig config;
  config.domain =
      parse_domain(require_field(doc, "domain").get<std::string>());
  config.anchors_path =
      require_field(doc, "anchors_path").get<std::string>();
  if (doc.contains("attribute_overrides_path") &&
      !doc["attribute_overrides_path"].is_null()) {
    config.attribute_overrides_path =
        doc["attribute_overrides_path"].get<std::string>();
  }
  if (doc.contains("attributes") && !doc["attributes"].is_null()) {
    config.attributes = doc["attributes"].get<std::vector<std::string>>();
  }
  if (doc.contains("personality_profiles") &&
      !doc["personality_profiles"].is_null()) {
    config.personality_profiles =
        doc["personality_profiles"].get<std::vector<std::string>>();
  }
  config.k = doc.value("k", config.k);
  if (doc.contains("ks_sweep") && !doc["ks_sweep"].is_null()) {
    config.ks_sweep = doc["ks_sweep"].get<std::vector<int>>();
  }
  if (doc.contains("metrics") && !doc["metrics"].is_null()) {
    config.metrics.clear();
    for (const auto& name : doc["metrics"]) {
      config.metrics.push_back(parse_metric(name.get<std::string>()));
    }
  }
  config.seed = doc.value("seed", config.seed);
  if (doc.contains("provider")) config.provider = parse_provider(doc["provider"]);
  config.mock = parse_mock(doc.contains("mock") ? doc["mock"]
                                                : nlohmann::json::object(),
                           config.seed);
  if (doc.contains("perturbations")) {
    config.perturbations = parse_perturbations(doc["perturbations"]);
  }
  config.samples_n = doc.value("samples_n", config.samples_n);
  if (doc.contains("aggregation_mode")) {
    config.aggregation_mode =
        parse_aggregation_mode(doc["aggregation_mode"].get<std::string>());
  }
  config.output_dir = require_field(doc, "output_dir").get<std::string>();
  config.cache_dir = doc.value("cache_dir", std::string{});

  // Relative paths are relative to the config file, so a config bundle can
  // move as a unit.
  std::filesystem::path base = path.parent_path();
  config.anchors_path = resolve_relative(base, config.anchors_path);
  if (config.attribute_overrides_path) {
    config.attribute_overrides_path =
        resolve_relative(base, *config.attribute_overrides_path);
  }
  config.output_dir = resolve_relative(base, config.output_dir);
  config.cache_dir = resolve_relative(base, config.cache_dir);
  return config;
}

void apply_overrides(RunConfig& config, const RunOverrides& overrides) {
  if (overrides.provider_kind) {
    config.provider.kind = parse_provider_kind(*overrides.provider_kind);
  }
  if (overrides.k) config.k = *overrides.k;
  if (overrides.seed) {
    config.seed = *overrides.seed;
    config.mock.seed = *overrides.seed;
  }
  if (overrides.samples) config.samples_n = *overrides.samples;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.domain) config.domain = parse_domain(*overrides.domain);
}

void validate_run_config(const RunConfig& config) {
  if (config.k < 1) throw ConfigError("k must be >= 1");
  if (config.samples_n < 1) throw ConfigError("samples_n must be >= 1");
  if (config.anchors_path.empty()) throw ConfigError("anchors_path is empty");
  if (config.output_dir.empty()) throw ConfigError("output_dir is empty");
  if (!config.ks_sweep.empty()) {
    if (!std::is_sorted(config.ks_sweep.begin(), config.ks_sweep.end())) {
      throw ConfigError("ks_sweep must be ascending");
    }
    for (int k : config.ks_sweep) {
      if (k < 1 || k > config.k) {
        throw ConfigError("ks_sweep entries must be in [1, k]");
      }
    }
  }
  if (config.mock.bias_strength < 0.0 || config.mock.bias_strength > 1.0) {
    throw ConfigError("bias_strength must be in [0, 1]");
  }
  if (config.mock.noise_temperature < 0.0) {
    throw ConfigError("noise_temperature must be >= 0");
  }
  if (config.provider.kind == ProviderKind::kMock &&
      config.mock.catalog_size < config.k) {
    throw ConfigError("mock catalog_size must be >= k");
  }
}

RunResult run_audit(const RunConfig& config) {
  validate_run_config(config);
  std::string started_at = iso_utc_now();

  AnchorSet anchors = load_anchors(config.anchors_path, config.domain);

  std::vector<SensitiveAttribute> registry =
      config.attribute_overrides_path
          ? load_attribute_overrides(*config.attribute_overrides_path)
          : builtin_attributes();
  if (config.attributes) {
    std::vector<SensitiveAttribute> filtered;
    for (const auto& attribute : registry) {
      if (std::find(config.attributes->begin(), config.attributes->end(),
                    attribute.name) != config.attributes->end()) {
        filtered.push_back(attribute);
      }
    }
    for (const auto& name : *config.attributes) {
      if (std::none_of(filtered.begin(), filtered.end(), [&](const auto& a) {
            return a.name == name;
          })) {
        throw ConfigError("attribute filter names unknown attribute '" + name +
                          "'");
      }
    }
    registry = std::move(filtered);
  }
  if (registry.empty()) throw ConfigError("attribute registry is empty");

  std::vector<std::string> profiles;
  if (!config.personality_profiles) {
    profiles = default_personality_profiles().profiles;
  } else if (!config.personality_profiles->empty()) {
    PersonalityProfileSet set{*config.personality_profiles};
    validate_profiles(set);
    profiles = set.profiles;
  }

  BatchConfig batch_config;
  batch_config.domain = config.domain;
  batch_config.k = config.k;
  batch_config.profiles = profiles;
  batch_config.seed = config.seed;
  for (const auto& spec : config.perturbations) {
    if (spec.kind == PerturbationKind::kTypo) {
      batch_config.typo_perturbation = true;
      if (batch_config.typo_values.empty()) {
        batch_config.typo_values = spec.values;
      } else if (!spec.values.empty()) {
        batch_config.typo_values.insert(batch_config.typo_values.end(),
                                        spec.values.begin(),
                                        spec.values.end());
      }
    } else {
      batch_config.french_perturbation = true;
      for (const auto& [value, translated] : spec.translation_overrides) {
        batch_config.translation_overrides[value] = translated;
      }
    }
  }
  PromptBatch batch = enumerate_batch(anchors, registry, batch_config);

  // --- dispatch ---
  ModelGateway gateway(config.provider,
                       config.provider.kind == ProviderKind::kMock
                           ? std::optional<MockModelConfig>(config.mock)
                           : std::nullopt,
                       config.cache_dir);

  std::vector<SampleSetResult> raw_results(batch.instances.size());
  {
    unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    int workers = std::min<int>(config.provider.max_in_flight,
                                static_cast<int>(hardware) * 2);
    workers = std::max(1, std::min<int>(workers,
                                        static_cast<int>(batch.instances.size())));
    std::atomic<size_t> next{0};
    std::atomic<bool> cancelled{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto work = [&] {
      while (!cancelled.load()) {
        size_t i = next.fetch_add(1);
        if (i >= batch.instances.size()) break;
        try {
          raw_results[i] = gateway.sample_n(batch.instances[i],
                                            config.samples_n);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          cancelled.store(true);
          break;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& thread : pool) thread.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // --- parse ---
  std::vector<Outcome> outcomes(batch.instances.size());
  for (size_t i = 0; i < batch.instances.size(); ++i) {
    const PromptInstance& instance = batch.instances[i];
    Outcome& outcome = outcomes[i];
    outcome.failures = raw_results[i].content_errors;
    for (const Completion& completion : raw_results[i].completions) {
      try {
        auto [list, report] =
            parse_list(completion.raw_text, config.k, instance.instance_id);
        if (completion.sample_index == 0) outcome.primary = list;
        outcome.lists.push_back(std::move(list));
      } catch (const EmptyListError& e) {
        outcome.failures.push_back(
            {completion.sample_index, e.kind(), e.what()});
      }
    }
  }

  // --- group per anchor ---
  std::vector<AnchorData> anchor_data;
  std::map<std::string, size_t> anchor_index;
  for (const auto& anchor : anchors.anchors) {
    anchor_index[anchor.name] = anchor_data.size();
    anchor_data.push_back(AnchorData{anchor.name, nullptr, nullptr, {}, {}, {}});
  }
  TranslationTable merged_translations = builtin_translations();
  for (const auto& [value, translated] : batch_config.translation_overrides) {
    merged_translations[value] = translated;
  }
  for (size_t i = 0; i < batch.instances.size(); ++i) {
    const PromptInstance& instance = batch.instances[i];
    AnchorData& data = anchor_data[anchor_index.at(instance.anchor)];
    const Outcome* outcome = &outcomes[i];
    if (instance.perturbation.kind == PerturbationKind::kNone) {
      switch (instance.condition.kind) {
        case ConditionKind::kNeutral:
          data.neutral_en = outcome;
          break;
        case ConditionKind::kSensitive:
          data.values.emplace_back(instance.condition.attribute_values[0].first,
                                   instance.condition.attribute_values[0].second,
                                   outcome);
          break;
        case ConditionKind::kPersonality:
          data.profiles.emplace_back(instance.condition.profile, outcome);
          break;
        case ConditionKind::kIntersectional:
          break;  // not enumerated by batches
      }
    } else if (instance.perturbation.kind == PerturbationKind::kTypo) {
      data.variants.push_back(
          {instance.condition.attribute_values[0].first,
           instance.perturbation.base_value, instance.perturbation.variant_label,
           instance.condition.attribute_values[0].second, Language::kEn,
           outcome});
    } else {  // translate
      if (instance.condition.kind == ConditionKind::kNeutral) {
        data.neutral_fr = outcome;
      } else {
        data.variants.push_back(
            {instance.condition.attribute_values[0].first,
             instance.perturbation.base_value, instance.perturbation.variant_label,
             translate_value(instance.condition.attribute_values[0].second,
                             merged_translations),
             Language::kFr, outcome});
      }
    }
  }

  // --- score ---
  SimilarityTable table;
  std::vector<ScoredVariant> variant_rows;
  int prag_skips = 0;
  int excluded_rows = 0;
  // (metric, k, attribute, value) → (sum, count) for the K sweep
  std::map<std::tuple<int, int, std::string, std::string>,
           std::pair<double, int>>
      sweep_sums;

  for (const AnchorData& data : anchor_data) {
    const RankedList* reference = primary_of(data.neutral_en);
    for (const auto& [attribute, value, outcome] : data.values) {
      const RankedList* candidate = primary_of(outcome);
      for (Metric metric : config.metrics) {
        if (reference == nullptr || candidate == nullptr) {
          table.rows.push_back({data.name, attribute, value, "", metric,
                                config.k, 0.0, true});
          ++excluded_rows;
          continue;
        }
        auto sim = similarity_at_k(metric, *reference, *candidate, config.k);
        if (!sim) {
          ++prag_skips;
          continue;
        }
        table.rows.push_back({data.name, attribute, value, "", metric,
                              config.k, *sim, false});
      }
      if (!config.ks_sweep.empty() && reference != nullptr &&
          candidate != nullptr) {
        for (Metric metric : config.metrics) {
          for (int kk : config.ks_sweep) {
            auto sim = similarity_at_k(metric, *reference, *candidate, kk);
            if (!sim) continue;
            auto& slot = sweep_sums[{static_cast<int>(metric), kk, attribute,
                                     value}];
            slot.first += *sim;
            slot.second += 1;
          }
        }
      }
    }

    // Personality stability rows: the profile-conditioned list is the
    // reference each value list is compared against.
    for (const auto& [attribute, value, outcome] : data.values) {
      const RankedList* candidate = primary_of(outcome);
      for (const auto& [profile, profile_outcome] : data.profiles) {
        const RankedList* profile_reference = primary_of(profile_outcome);
        for (Metric metric : config.metrics) {
          if (profile_reference == nullptr || candidate == nullptr) {
            table.rows.push_back({data.name, attribute, value, profile, metric,
                                  config.k, 0.0, true});
            ++excluded_rows;
            continue;
          }
          auto sim = similarity_at_k(metric, *profile_reference, *candidate,
                                     config.k);
          if (!sim) {
            ++prag_skips;
            continue;
          }
          table.rows.push_back({data.name, attribute, value, profile, metric,
                                config.k, *sim, false});
        }
      }
    }

    for (const VariantSlot& variant : data.variants) {
      const RankedList* variant_reference =
          variant.language == Language::kFr ? primary_of(data.neutral_fr)
                                            : reference;
      const RankedList* candidate = primary_of(variant.outcome);
      for (Metric metric : config.metrics) {
        if (variant_reference == nullptr || candidate == nullptr) {
          variant_rows.push_back({data.name, variant.attribute,
                                  variant.base_value, variant.label,
                                  variant.variant_value, metric, 0.0, true});
          ++excluded_rows;
          continue;
        }
        auto sim =
            similarity_at_k(metric, *variant_reference, *candidate, config.k);
        if (!sim) {
          ++prag_skips;
          continue;
        }
        variant_rows.push_back({data.name, variant.attribute,
                                variant.base_value, variant.label,
                                variant.variant_value, metric, *sim, false});
      }
    }
  }

  // --- aggregate ---
  FairnessSummary summary = build_fairness_summary(
      table, registry, config.metrics, config.k, profiles,
      config.aggregation_mode);

  // --- assemble output files in memory ---
  std::string domain_label = domain_name(config.domain);
  std::string k_label = std::to_string(config.k);

  // similarities.csv
  std::string similarities_csv;
  {
    // per (metric, attribute, value): min/max over non-excluded plain rows
    std::map<std::tuple<int, std::string, std::string>,
             std::pair<double, double>>
        min_max;
    for (const auto& row : table.rows) {
      if (row.excluded || !row.profile.empty()) continue;
      auto key = std::make_tuple(static_cast<int>(row.metric), row.attribute,
                                 row.value);
      auto it = min_max.find(key);
      if (it == min_max.end()) {
        min_max[key] = {row.similarity, row.similarity};
      } else {
        it->second.first = std::min(it->second.first, row.similarity);
        it->second.second = std::max(it->second.second, row.similarity);
      }
    }

    struct OutRow {
      std::string metric, attribute, value, anchor, profile, variant,
          variant_value, similarity, excluded, value_min, value_max;
    };
    std::vector<OutRow> rows;
    for (const auto& row : table.rows) {
      OutRow out;
      out.metric = metric_name(row.metric);
      out.attribute = row.attribute;
      out.value = row.value;
      out.anchor = row.anchor;
      out.profile = row.profile;
      out.similarity = row.excluded ? "" : format_fixed(row.similarity);
      out.excluded = row.excluded ? "1" : "0";
      if (row.profile.empty() && !row.excluded) {
        auto it = min_max.find(std::make_tuple(static_cast<int>(row.metric),
                                               row.attribute, row.value));
        if (it != min_max.end()) {
          out.value_min = format_fixed(it->second.first);
          out.value_max = format_fixed(it->second.second);
        }
      }
      rows.push_back(std::move(out));
    }
    for (const auto& row : variant_rows) {
      OutRow out;
      out.metric = metric_name(row.metric);
      out.attribute = row.attribute;
      out.value = row.value;
      out.anchor = row.anchor;
      out.variant = row.label;
      out.variant_value = row.variant_value;
      out.similarity = row.excluded ? "" : format_fixed(row.similarity);
      out.excluded = row.excluded ? "1" : "0";
      rows.push_back(std::move(out));
    }
    std::sort(rows.begin(), rows.end(), [](const OutRow& a, const OutRow& b) {
      return std::tie(a.metric, a.attribute, a.value, a.anchor, a.profile,
                      a.variant, a.variant_value) <
             std::tie(b.metric, b.attribute, b.value, b.anchor, b.profile,
                      b.variant, b.variant_value);
    });
    CsvWriter writer({"domain", "metric", "k", "attribute", "value", "anchor",
                      "profile", "variant", "variant_value", "similarity",
                      "excluded", "value_min", "value_max"});
    for (const auto& row : rows) {
      writer.add_row({domain_label, row.metric, k_label, row.attribute,
                      row.value, row.anchor, row.profile, row.variant,
                      row.variant_value, row.similarity, row.excluded,
                      row.value_min, row.value_max});
    }
    similarities_csv = writer.str();
  }

  // summary.csv — PAFS rows use "pafs_<metric>" as their metric label.
  std::string summary_csv;
  {
    struct OutRow {
      std::string metric, attribute, stat, value;
    };
    std::vector<OutRow> rows;
    auto add_entries = [&](const std::vector<FairnessEntry>& entries,
                           bool pafs_rows) {
      for (const auto& entry : entries) {
        std::string label = pafs_rows ? "pafs_" + metric_name(entry.metric)
                                      : metric_name(entry.metric);
        rows.push_back({label, entry.attribute, "SNSR",
                        format_fixed(entry.stats.snsr)});
        rows.push_back({label, entry.attribute, "SNSV",
                        format_fixed(entry.stats.snsv)});
      }
    };
    add_entries(summary.entries, false);
    add_entries(summary.pafs_entries, true);
    std::sort(rows.begin(), rows.end(), [](const OutRow& a, const OutRow& b) {
      return std::tie(a.metric, a.attribute, a.stat) <
             std::tie(b.metric, b.attribute, b.stat);
    });
    CsvWriter writer({"domain", "metric", "k", "attribute", "stat", "value"});
    for (const auto& row : rows) {
      writer.add_row(
          {domain_label, row.metric, k_label, row.attribute, row.stat,
           row.value});
    }
    summary_csv = writer.str();
  }

  // ranking.txt
  std::optional<std::string> ranking_txt;
  std::string ranking_basis;
  if (!config.metrics.empty()) {
    Metric basis = config.metrics.front();
    for (Metric metric : config.metrics) {
      if (metric == Metric::kPragStar) basis = metric;
    }
    ranking_basis = metric_name(basis);
    std::vector<std::string> ranked =
        rank_attributes_by_snsv(summary, basis, config.k);
    std::string text = "# attributes ranked by SNSV, " + ranking_basis + "@" +
                       k_label + "\n";
    for (size_t i = 0; i < ranked.size(); ++i) {
      text += std::to_string(i + 1) + ". " + ranked[i] + "\n";
    }
    ranking_txt = std::move(text);
  }

  // k_sweep.csv
  std::optional<std::string> k_sweep_csv;
  if (!config.ks_sweep.empty()) {
    struct OutRow {
      std::string metric;
      int k;
      std::string attribute, value, mean;
    };
    std::vector<OutRow> rows;
    for (const auto& [key, sum_count] : sweep_sums) {
      const auto& [metric_int, kk, attribute, value] = key;
      rows.push_back({metric_name(static_cast<Metric>(metric_int)), kk,
                      attribute, value,
                      format_fixed(sum_count.first / sum_count.second)});
    }
    std::sort(rows.begin(), rows.end(), [](const OutRow& a, const OutRow& b) {
      return std::tie(a.metric, a.k, a.attribute, a.value) <
             std::tie(b.metric, b.k, b.attribute, b.value);
    });
    CsvWriter writer(
        {"domain", "metric", "k", "attribute", "value", "mean_similarity"});
    for (const auto& row : rows) {
      writer.add_row({domain_label, row.metric, std::to_string(row.k),
                      row.attribute, row.value, row.mean});
    }
    k_sweep_csv = writer.str();
  }

  // robustness.csv
  std::optional<std::string> robustness_csv;
  if (!config.perturbations.empty() && !config.metrics.empty()) {
    // (metric, attribute, value, label, variant_value) → (sum, count)
    std::map<std::tuple<int, std::string, std::string, std::string, std::string>,
             std::pair<double, int>>
        variant_sums;
    for (const auto& row : variant_rows) {
      if (row.excluded) continue;
      auto& slot = variant_sums[{static_cast<int>(row.metric), row.attribute,
                                 row.value, row.label, row.variant_value}];
      slot.first += row.similarity;
      slot.second += 1;
    }

    std::map<std::pair<int, std::string>, const AttributeStats*> stats_index;
    for (const auto& entry : summary.entries) {
      stats_index[{static_cast<int>(entry.metric), entry.attribute}] =
          &entry.stats;
    }

    struct OutRow {
      std::string metric, attribute, value, variant, variant_value, baseline,
          variant_mean, delta;
    };
    std::vector<OutRow> rows;
    for (const auto& [key, sum_count] : variant_sums) {
      const auto& [metric_int, attribute, value, label, variant_value] = key;
      auto stats = stats_index.find({metric_int, attribute});
      if (stats == stats_index.end()) continue;
      auto baseline_it = stats->second->per_value_mean.find(value);
      if (baseline_it == stats->second->per_value_mean.end()) {
        throw AggregationError("perturbed value '" + value +
                               "' has no baseline mean");
      }
      double baseline = baseline_it->second;
      double variant_mean = sum_count.first / sum_count.second;
      rows.push_back({metric_name(static_cast<Metric>(metric_int)), attribute,
                      value, label, variant_value, format_fixed(baseline),
                      format_fixed(variant_mean),
                      format_fixed(variant_mean - baseline)});
    }
    std::sort(rows.begin(), rows.end(), [](const OutRow& a, const OutRow& b) {
      return std::tie(a.metric, a.attribute, a.value, a.variant,
                      a.variant_value) <
             std::tie(b.metric, b.attribute, b.value, b.variant,
                      b.variant_value);
    });
    CsvWriter writer({"domain", "metric", "k", "attribute", "value", "variant",
                      "variant_value", "baseline_mean", "variant_mean",
                      "delta"});
    for (const auto& row : rows) {
      writer.add_row({domain_label, row.metric, k_label, row.attribute,
                      row.value, row.variant, row.variant_value, row.baseline,
                      row.variant_mean, row.delta});
    }
    robustness_csv = writer.str();
  }

  // entropy.csv
  std::optional<std::string> entropy_csv;
  if (config.samples_n > 1) {
    CsvWriter writer({"instance_id", "n", "distinct_items", "entropy_nats",
                      "normalized_entropy", "exact_match_rate",
                      "mean_pairwise_jaccard", "degenerate_flag"});
    for (size_t i = 0; i < batch.instances.size(); ++i) {
      if (outcomes[i].lists.empty()) continue;
      SampleSet samples{batch.instances[i].instance_id, outcomes[i].lists};
      EntropyReport report = predictive_entropy(samples);
      writer.add_row(
          {samples.instance_id, std::to_string(report.n),
           std::to_string(report.distinct_items),
           format_fixed(report.entropy_nats),
           format_fixed(report.normalized_entropy),
           report.exact_match_rate ? format_fixed(*report.exact_match_rate)
                                   : "",
           report.mean_pairwise_jaccard
               ? format_fixed(*report.mean_pairwise_jaccard)
               : "",
           report.degenerate ? "1" : "0"});
    }
    entropy_csv = writer.str();
  }

  // prompts.jsonl
  std::string prompts_jsonl;
  for (const auto& instance : batch.instances) {
    ordered_json record;
    record["instance_id"] = instance.instance_id;
    record["anchor"] = instance.anchor;
    record["condition"] = condition_kind_name(instance.condition.kind);
    ordered_json values = ordered_json::array();
    for (const auto& [attribute, value] : instance.condition.attribute_values) {
      values.push_back({attribute, value});
    }
    record["attribute_values"] = std::move(values);
    record["profile"] = instance.condition.profile;
    record["language"] = language_name(instance.language);
    ordered_json perturbation;
    perturbation["kind"] = perturbation_kind_name(instance.perturbation.kind);
    if (instance.perturbation.kind == PerturbationKind::kTypo) {
      perturbation["typo_kind"] = typo_kind_name(instance.perturbation.typo_kind);
      perturbation["position"] = instance.perturbation.position;
    }
    if (instance.perturbation.kind != PerturbationKind::kNone) {
      perturbation["base_value"] = instance.perturbation.base_value;
      perturbation["label"] = instance.perturbation.variant_label;
    }
    record["perturbation"] = std::move(perturbation);
    record["k"] = instance.k;
    record["rendered_text"] = instance.rendered_text;
    prompts_jsonl += record.dump() + "\n";
  }

  // manifest.json
  RunResult result;
  result.output_dir = config.output_dir;
  result.instances = static_cast<int>(batch.instances.size());
  result.excluded_rows = excluded_rows;
  for (const auto& outcome : outcomes) {
    for (const auto& failure : outcome.failures) {
      result.content_error_counts[failure.kind] += 1;
    }
  }
  result.summary = summary;

  ordered_json manifest;
  manifest["version"] = kVersionTag;
  manifest["started_at"] = started_at;
  manifest["finished_at"] = iso_utc_now();
  manifest["config"] = config_snapshot(config);
  manifest["templates"] = {{"en", prompt_template(Language::kEn)},
                           {"fr", prompt_template(Language::kFr)}};
  manifest["registry"] = nlohmann::json::parse(serialize_registry(registry));
  manifest["personality_profiles"] = profiles;
  manifest["manifest_hash"] = batch.manifest_hash;
  manifest["aggregation_mode"] = aggregation_mode_name(config.aggregation_mode);
  ordered_json exclusions;
  exclusions["content_errors"] = result.content_error_counts;
  exclusions["excluded_rows"] = excluded_rows;
  exclusions["prag_star_skips"] = prag_skips;
  manifest["exclusions"] = std::move(exclusions);
  ordered_json ranking_info;
  ranking_info["emitted"] = ranking_txt.has_value();
  if (ranking_txt) {
    ranking_info["basis_metric"] = ranking_basis;
  } else {
    ranking_info["note"] = "no metrics selected, ranking omitted";
  }
  manifest["ranking"] = std::move(ranking_info);

  // --- write everything at once ---
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " +
                  config.output_dir.string() + ": " + ec.message());
  }
  write_text_file(config.output_dir / "similarities.csv", similarities_csv);
  write_text_file(config.output_dir / "summary.csv", summary_csv);
  if (ranking_txt) {
    write_text_file(config.output_dir / "ranking.txt", *ranking_txt);
  }
  if (k_sweep_csv) {
    write_text_file(config.output_dir / "k_sweep.csv", *k_sweep_csv);
  }
  if (robustness_csv) {
    write_text_file(config.output_dir / "robustness.csv", *robustness_csv);
  }
  if (entropy_csv) {
    write_text_file(config.output_dir / "entropy.csv", *entropy_csv);
  }
  write_text_file(config.output_dir / "prompts.jsonl", prompts_jsonl);
  write_text_file(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace audit
