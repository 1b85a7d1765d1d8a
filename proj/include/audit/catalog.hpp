#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace audit {

enum class Domain { kMovie, kMusic };

std::string domain_name(Domain domain);
Domain parse_domain(const std::string& name);

/// The noun the prompt template uses for the domain's items.
std::string domain_item_noun(Domain domain);

struct AnchorRecord {
  std::string name;
  std::string source_tag;
  std::map<std::string, std::string> metadata;

  bool operator==(const AnchorRecord&) const = default;
};

/// The named entities that seed prompts, in file order, deduplicated.
struct AnchorSet {
  Domain domain = Domain::kMusic;
  std::vector<AnchorRecord> anchors;

  bool operator==(const AnchorSet&) const = default;
};

enum class ArticleMode { kBare, kWithArticle };

std::string article_mode_name(ArticleMode mode);
ArticleMode parse_article_mode(const std::string& name);

struct SensitiveAttribute {
  std::string name;
  std::vector<std::string> values;
  ArticleMode article_mode = ArticleMode::kBare;

  bool operator==(const SensitiveAttribute&) const = default;
};

struct PersonalityProfileSet {
  std::vector<std::string> profiles;

  bool operator==(const PersonalityProfileSet&) const = default;
};

/// Loads a CSV anchor file (UTF-8, header row, mandatory `name` column).
/// Duplicate names (after trimming) keep the first occurrence; extra
/// columns are preserved as metadata.
AnchorSet load_anchors(const std::filesystem::path& path, Domain domain);

/// The built-in registry of 8 sensitive attributes and 30 categorical
/// values, in registry order.
std::vector<SensitiveAttribute> builtin_attributes();

/// Loads an override file (JSON: attribute name -> {values, article_mode})
/// and returns the built-in registry with those attributes replaced or
/// appended.
std::vector<SensitiveAttribute> load_attribute_overrides(
    const std::filesystem::path& path);

/// Replaces by name (keeping registry position) or appends.
std::vector<SensitiveAttribute> apply_overrides(
    std::vector<SensitiveAttribute> base,
    const std::vector<SensitiveAttribute>& overrides);

/// Throws ConfigError unless the attribute has >= 2 unique, non-empty
/// values.
void validate_attribute(const SensitiveAttribute& attribute);

/// Ten descriptors from the Big Five high/low poles.
PersonalityProfileSet default_personality_profiles();

void validate_profiles(const PersonalityProfileSet& profiles);

/// Canonical JSON serialization, used for golden tests and the run
/// manifest. parse_registry(serialize_registry(r)) == r.
std::string serialize_registry(const std::vector<SensitiveAttribute>& registry);
std::vector<SensitiveAttribute> parse_registry(const std::string& json_text);

std::string serialize_anchor_set(const AnchorSet& set);

}  // namespace audit
