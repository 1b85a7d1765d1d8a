#include "audit/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "audit/csv.hpp"
#include "audit/errors.hpp"
#include "audit/util.hpp"

namespace audit {

std::string domain_name(Domain domain) {
  return domain == Domain::kMovie ? "movie" : "music";
}

Domain parse_domain(const std::string& name) {
  if (name == "movie") return Domain::kMovie;
  if (name == "music") return Domain::kMusic;
  throw ConfigError("unknown domain '" + name + "' (expected movie|music)");
}

std::string domain_item_noun(Domain domain) {
  return domain == Domain::kMovie ? "movie" : "song";
}

std::string article_mode_name(ArticleMode mode) {
  return mode == ArticleMode::kBare ? "bare" : "with_article";
}

ArticleMode parse_article_mode(const std::string& name) {
  if (name == "bare") return ArticleMode::kBare;
  if (name == "with_article") return ArticleMode::kWithArticle;
  throw ConfigError("unknown article_mode '" + name +
                    "' (expected bare|with_article)");
}

AnchorSet load_anchors(const std::filesystem::path& path, Domain domain) {
  CsvFile csv = read_csv(path);

  int name_column = -1;
  for (size_t i = 0; i < csv.header.size(); ++i) {
    if (trim(csv.header[i]) == "name") {
      name_column = static_cast<int>(i);
      break;
    }
  }
  if (name_column < 0) {
    throw IoError("anchor file " + path.string() +
                  " has no 'name' column in its header");
  }

  AnchorSet set;
  set.domain = domain;
  std::set<std::string> seen;
  for (const auto& row : csv.rows) {
    if (static_cast<size_t>(name_column) >= row.fields.size()) {
      throw IoError("malformed row at line " +
                    std::to_string(row.line_number) + " of " + path.string() +
                    ": missing 'name' field");
    }
    std::string name = trim(row.fields[name_column]);
    if (name.empty()) {
      throw IoError("malformed row at line " +
                    std::to_string(row.line_number) + " of " + path.string() +
                    ": empty anchor name");
    }
    if (!seen.insert(name).second) {
      continue;  // first occurrence wins
    }
    AnchorRecord record;
    record.name = name;
    for (size_t i = 0; i < csv.header.size() && i < row.fields.size(); ++i) {
      if (static_cast<int>(i) == name_column) continue;
      std::string key = trim(csv.header[i]);
      if (key == "source_tag") {
        record.source_tag = trim(row.fields[i]);
      } else if (!key.empty()) {
        record.metadata[key] = row.fields[i];
      }
    }
    set.anchors.push_back(std::move(record));
  }
  if (set.anchors.empty()) {
    throw IoError("empty anchor set: " + path.string());
  }
  return set;
}

std::vector<SensitiveAttribute> builtin_attributes() {
  return {
      {"Age", {"Young", "Middle aged", "Old"}, ArticleMode::kBare},
      {"Continent", {"Asian", "African", "American"}, ArticleMode::kBare},
      {"Nationality",
       {"an American", "a Brazilian", "a British", "a Chinese", "a French",
        "a German", "a Japanese"},
       ArticleMode::kWithArticle},
      {"Gender", {"a male", "a female"}, ArticleMode::kWithArticle},
      {"Occupation",
       {"a doctor", "a student", "a teacher", "a worker", "a writer"},
       ArticleMode::kWithArticle},
      {"Physical", {"Fat", "Thin"}, ArticleMode::kBare},
      {"Race",
       {"a black", "a white", "a yellow", "an African American"},
       ArticleMode::kWithArticle},
      {"Religion",
       {"a Buddhist", "a Christian", "a Hindu", "a Muslim"},
       ArticleMode::kWithArticle},
  };
}

void validate_attribute(const SensitiveAttribute& attribute) {
  if (trim(attribute.name).empty()) {
    throw ConfigError("attribute with empty name");
  }
  if (attribute.values.size() < 2) {
    throw ConfigError("attribute '" + attribute.name +
                      "' needs at least 2 values, has " +
                      std::to_string(attribute.values.size()));
  }
  std::set<std::string> unique;
  for (const auto& value : attribute.values) {
    if (trim(value).empty()) {
      throw ConfigError("attribute '" + attribute.name + "' has an empty value");
    }
    if (!unique.insert(value).second) {
      throw ConfigError("attribute '" + attribute.name +
                        "' has duplicate value '" + value + "'");
    }
  }
}

std::vector<SensitiveAttribute> apply_overrides(
    std::vector<SensitiveAttribute> base,
    const std::vector<SensitiveAttribute>& overrides) {
  for (const auto& attribute : overrides) {
    validate_attribute(attribute);
    auto it = std::find_if(base.begin(), base.end(), [&](const auto& existing) {
      return existing.name == attribute.name;
    });
    if (it != base.end()) {
      *it = attribute;
    } else {
      base.push_back(attribute);
    }
  }
  return base;
}

std::vector<SensitiveAttribute> load_attribute_overrides(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open attribute override file: " + path.string());
  }
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("attribute override file must be a JSON object "
                      "mapping attribute name -> {values, article_mode}");
  }
  std::vector<SensitiveAttribute> overrides;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    SensitiveAttribute attribute;
    attribute.name = it.key();
    const auto& entry = it.value();
    if (!entry.is_object() || !entry.contains("values") ||
        !entry["values"].is_array()) {
      throw ConfigError("attribute '" + attribute.name +
                        "' must be an object with a 'values' array");
    }
    for (const auto& value : entry["values"]) {
      if (!value.is_string()) {
        throw ConfigError("attribute '" + attribute.name +
                          "' has a non-string value");
      }
      attribute.values.push_back(value.get<std::string>());
    }
    attribute.article_mode =
        entry.contains("article_mode")
            ? parse_article_mode(entry["article_mode"].get<std::string>())
            : ArticleMode::kBare;
    overrides.push_back(std::move(attribute));
  }
  return apply_overrides(builtin_attributes(), overrides);
}

PersonalityProfileSet default_personality_profiles() {
  return {{
      "a highly extraverted",
      "a highly introverted",
      "a highly agreeable",
      "a highly antagonistic",
      "a highly conscientious",
      "a highly careless",
      "a highly neurotic",
      "a highly emotionally stable",
      "a highly open-minded",
      "a highly closed-minded",
  }};
}

void validate_profiles(const PersonalityProfileSet& profiles) {
  if (profiles.profiles.size() < 2) {
    throw ConfigError("personality profile set needs at least 2 profiles, has " +
                      std::to_string(profiles.profiles.size()));
  }
  std::set<std::string> unique;
  for (const auto& profile : profiles.profiles) {
    if (trim(profile).empty()) {
      throw ConfigError("empty personality profile");
    }
    if (!unique.insert(profile).second) {
      throw ConfigError("duplicate personality profile '" + profile + "'");
    }
  }
}

std::string serialize_registry(
    const std::vector<SensitiveAttribute>& registry) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& attribute : registry) {
    nlohmann::ordered_json entry;
    entry["name"] = attribute.name;
    entry["values"] = attribute.values;
    entry["article_mode"] = article_mode_name(attribute.article_mode);
    doc.push_back(std::move(entry));
  }
  return doc.dump(2);
}

std::vector<SensitiveAttribute> parse_registry(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text);
  std::vector<SensitiveAttribute> registry;
  for (const auto& entry : doc) {
    SensitiveAttribute attribute;
    attribute.name = entry.at("name").get<std::string>();
    for (const auto& value : entry.at("values")) {
      attribute.values.push_back(value.get<std::string>());
    }
    attribute.article_mode =
        parse_article_mode(entry.at("article_mode").get<std::string>());
    registry.push_back(std::move(attribute));
  }
  return registry;
}

std::string serialize_anchor_set(const AnchorSet& set) {
  nlohmann::ordered_json doc;
  doc["domain"] = domain_name(set.domain);
  doc["anchors"] = nlohmann::ordered_json::array();
  for (const auto& anchor : set.anchors) {
    nlohmann::ordered_json entry;
    entry["name"] = anchor.name;
    entry["source_tag"] = anchor.source_tag;
    entry["metadata"] = anchor.metadata;
    doc["anchors"].push_back(std::move(entry));
  }
  return doc.dump(2);
}

}  // namespace audit
