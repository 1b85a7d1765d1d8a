#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "audit/catalog.hpp"

namespace audit {

enum class Language { kEn, kFr };

std::string language_name(Language language);
Language parse_language(const std::string& name);

enum class ConditionKind { kNeutral, kSensitive, kPersonality, kIntersectional };

struct Condition {
  ConditionKind kind = ConditionKind::kNeutral;
  // kSensitive: one (attribute, value); kIntersectional: ≥2 in registry order.
  // Holds the value the model is actually probed with, so a typo variant
  // carries the misspelled string here.
  std::vector<std::pair<std::string, std::string>> attribute_values;
  std::string profile;  // kPersonality only

  bool operator==(const Condition&) const = default;
};

enum class TypoKind { kDelete, kDuplicate };

std::string typo_kind_name(TypoKind kind);

enum class PerturbationKind { kNone, kTypo, kTranslate };

struct Perturbation {
  PerturbationKind kind = PerturbationKind::kNone;
  TypoKind typo_kind = TypoKind::kDelete;  // kTypo only
  int position = -1;                       // kTypo only
  std::string base_value;  // the unperturbed registry value, for reporting
  std::string variant_label;  // "", "typo_delete", "typo_duplicate", "fr"

  bool operator==(const Perturbation&) const = default;
};

struct PromptInstance {
  std::string anchor;
  Condition condition;
  Language language = Language::kEn;
  Perturbation perturbation;
  int k = 0;
  std::string rendered_text;
  std::string instance_id;  // hex hash of rendered_text

  bool operator==(const PromptInstance&) const = default;
};

struct PromptBatch {
  std::vector<PromptInstance> instances;
  std::string manifest_hash;
};

using TranslationTable = std::map<std::string, std::string>;

// The template skeleton with {feature}/{anchor}/{k}/{noun} placeholders, as
// recorded verbatim in run manifests.
std::string prompt_template(Language language);

// African/Asian/American only; everything else needs an override entry.
TranslationTable builtin_translations();

// Throws TranslationError when the value has no entry — never passes a value
// through untranslated.
std::string translate_value(const std::string& value,
                            const TranslationTable& table);

PromptInstance render_neutral(const std::string& anchor, Domain domain, int k,
                              Language language);

// values: one pair for a plain sensitive prompt, several (registry order) for
// an intersectional one. Leading articles survive only on the first value.
// French rendering translates each value via the table.
PromptInstance render_sensitive(
    const std::string& anchor,
    const std::vector<std::pair<std::string, std::string>>& values,
    Domain domain, int k, Language language,
    const TranslationTable& translations = {});

PromptInstance render_personality(const std::string& anchor,
                                  const std::string& profile, Domain domain,
                                  int k, Language language);

// Single-character edit; result always differs from the input.
std::string apply_typo(const std::string& value, TypoKind kind, int position);

// The position a typo sweep uses for this value: the published misspellings'
// position for "African", otherwise a seeded interior alphabetic position.
int default_typo_position(const std::string& value, std::uint64_t seed);

struct BatchConfig {
  Domain domain = Domain::kMusic;
  int k = 25;
  std::vector<std::string> profiles;
  bool typo_perturbation = false;
  std::vector<std::string> typo_values;  // empty → every registry value
  bool french_perturbation = false;
  TranslationTable translation_overrides;
  std::uint64_t seed = 0;
};

// Deterministic enumeration: anchors in file order; per anchor one neutral,
// sensitive instances in registry order, personality instances in profile
// order, then perturbation variants (typo delete+duplicate per scoped value,
// then the French neutral + sensitive set).
PromptBatch enumerate_batch(const AnchorSet& anchors,
                            const std::vector<SensitiveAttribute>& registry,
                            const BatchConfig& config);

}  // namespace audit
