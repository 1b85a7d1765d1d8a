#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "audit/csv.hpp"
#include "audit/errors.hpp"
#include "audit/runner.hpp"

using namespace audit;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const std::string& name) {
  return fs::path(FIXTURES_DIR) / name;
}

fs::path fresh_dir(const std::string& name) {
  auto path = fs::temp_directory_path() / name;
  fs::remove_all(path);
  fs::create_directories(path);
  return path;
}

fs::path write_config(const fs::path& dir, nlohmann::ordered_json doc) {
  auto path = dir / "config.json";
  std::ofstream out(path);
  out << doc.dump(2);
  return path;
}

nlohmann::ordered_json base_config(const std::string& out_name) {
  nlohmann::ordered_json doc;
  doc["domain"] = "music";
  doc["anchors_path"] = fixture("anchors_tiny.csv").string();
  doc["personality_profiles"] = nlohmann::json::array();
  doc["k"] = 5;
  doc["provider"] = {{"kind", "mock"}};
  doc["mock"] = {{"seed", 7}};
  doc["seed"] = 7;
  doc["output_dir"] = out_name;
  doc["cache_dir"] = "cache";
  return doc;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("config loading resolves paths relative to the config file") {
  auto dir = fresh_dir("audit_run_cfg");
  fs::copy_file(fixture("anchors_tiny.csv"), dir / "anchors.csv");
  auto doc = base_config("out");
  doc["anchors_path"] = "anchors.csv";
  auto config = load_run_config(write_config(dir, doc));
  CHECK(config.anchors_path == dir / "anchors.csv");
  CHECK(config.output_dir == dir / "out");
  CHECK(config.cache_dir == dir / "cache");
  CHECK(config.k == 5);
  CHECK(config.samples_n == 1);
  CHECK(config.seed == 7);
  CHECK(config.mock.seed == 7);
  CHECK(config.metrics.size() == 3);
  REQUIRE(config.personality_profiles.has_value());
  CHECK(config.personality_profiles->empty());
}

TEST_CASE("mock seed follows the run seed unless pinned") {
  auto dir = fresh_dir("audit_run_cfg2");
  auto doc = base_config("out");
  doc["seed"] = 99;
  doc["mock"] = nlohmann::ordered_json::object();
  auto config = load_run_config(write_config(dir, doc));
  CHECK(config.mock.seed == 99);

  doc["mock"] = {{"seed", 123}};
  auto pinned = load_run_config(write_config(dir, doc));
  CHECK(pinned.mock.seed == 123);
}

TEST_CASE("config errors are typed and specific") {
  auto dir = fresh_dir("audit_run_cfg3");
  CHECK_THROWS_AS(load_run_config(dir / "missing.json"), IoError);

  auto bad_json = dir / "bad.json";
  std::ofstream(bad_json) << "{not json";
  CHECK_THROWS_AS(load_run_config(bad_json), ConfigError);

  auto doc = base_config("out");
  doc.erase("anchors_path");
  CHECK_THROWS_AS(load_run_config(write_config(dir, doc)), ConfigError);

  doc = base_config("out");
  doc["domain"] = "books";
  CHECK_THROWS_AS(load_run_config(write_config(dir, doc)), ConfigError);

  doc = base_config("out");
  doc["metrics"] = {"jaccard", "ndcg"};
  CHECK_THROWS_AS(load_run_config(write_config(dir, doc)), ConfigError);

  doc = base_config("out");
  doc["perturbations"] = {{{"kind", "paraphrase"}}};
  CHECK_THROWS_AS(load_run_config(write_config(dir, doc)), ConfigError);
}

TEST_CASE("validation rejects inconsistent numeric settings") {
  auto dir = fresh_dir("audit_run_cfg4");
  auto make = [&](auto mutate) {
    auto doc = base_config("out");
    mutate(doc);
    return load_run_config(write_config(dir, doc));
  };
  CHECK_THROWS_AS(
      validate_run_config(make([](auto& d) { d["k"] = 0; })), ConfigError);
  CHECK_THROWS_AS(
      validate_run_config(make([](auto& d) { d["samples_n"] = 0; })),
      ConfigError);
  CHECK_THROWS_AS(
      validate_run_config(make([](auto& d) { d["ks_sweep"] = {3, 1}; })),
      ConfigError);
  CHECK_THROWS_AS(
      validate_run_config(make([](auto& d) { d["ks_sweep"] = {1, 99}; })),
      ConfigError);
  CHECK_THROWS_AS(
      validate_run_config(make([](auto& d) {
        d["mock"] = {{"bias_strength", 1.5}};
      })),
      ConfigError);
  CHECK_THROWS_AS(
      validate_run_config(make([](auto& d) {
        d["k"] = 50;
        d["mock"] = {{"catalog_size", 10}};
      })),
      ConfigError);
}

TEST_CASE("overrides land in both the run and the mock") {
  auto dir = fresh_dir("audit_run_cfg5");
  auto config = load_run_config(write_config(dir, base_config("out")));
  RunOverrides overrides;
  overrides.seed = 555;
  overrides.k = 9;
  overrides.samples = 3;
  overrides.domain = "movie";
  overrides.provider_kind = "mock";
  overrides.output_dir = dir / "elsewhere";
  apply_overrides(config, overrides);
  CHECK(config.seed == 555);
  CHECK(config.mock.seed == 555);
  CHECK(config.k == 9);
  CHECK(config.samples_n == 3);
  CHECK(config.domain == Domain::kMovie);
  CHECK(config.output_dir == dir / "elsewhere");
}

TEST_CASE("unknown attribute filter names fail fast") {
  auto dir = fresh_dir("audit_run_attr");
  auto doc = base_config("out");
  doc["attributes"] = {"Gender", "Starsign"};
  auto config = load_run_config(write_config(dir, doc));
  CHECK_THROWS_AS(run_audit(config), ConfigError);
}

TEST_CASE("summary covers attributes x metrics x stats") {
  auto dir = fresh_dir("audit_run_full");
  auto config = load_run_config(write_config(dir, base_config("out")));
  RunResult result = run_audit(config);
  CHECK(result.instances == 62);  // 2 anchors × (1 + 30)
  CHECK(result.excluded_rows == 0);

  CsvFile summary = read_csv(dir / "out" / "summary.csv");
  REQUIRE(summary.header ==
          std::vector<std::string>{"domain", "metric", "k", "attribute",
                                   "stat", "value"});
  CHECK(summary.rows.size() == 48);  // 8 attributes × 3 metrics × 2 stats
  for (const auto& row : summary.rows) {
    CHECK(row.fields[0] == "music");
    CHECK(row.fields[2] == "5");
    CHECK((row.fields[4] == "SNSR" || row.fields[4] == "SNSV"));
    // unbiased mock: every similarity is 1, every disparity exactly 0
    CHECK(row.fields[5] == "0.000000");
  }

  CHECK(fs::exists(dir / "out" / "similarities.csv"));
  CHECK(fs::exists(dir / "out" / "ranking.txt"));
  CHECK(fs::exists(dir / "out" / "prompts.jsonl"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "k_sweep.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "robustness.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "entropy.csv"));

  // one prompt record per instance
  std::istringstream prompts(slurp(dir / "out" / "prompts.jsonl"));
  int lines = 0;
  for (std::string line; std::getline(prompts, line);) ++lines;
  CHECK(lines == 62);

  auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["version"] == "0.1.0");
  CHECK(manifest["config"]["k"] == 5);
  CHECK(manifest["registry"].size() == 8);
  CHECK(manifest["aggregation_mode"] == "means_then_disparity");
  CHECK(manifest["templates"]["en"].get<std::string>().find("{anchor}") !=
        std::string::npos);
  CHECK(manifest["exclusions"]["excluded_rows"] == 0);
  CHECK(manifest["ranking"]["basis_metric"] == "prag_star");
}

TEST_CASE("similarity rows are sorted and carry value min/max") {
  auto dir = fresh_dir("audit_run_sims");
  auto doc = base_config("out");
  doc["attributes"] = {"Continent"};
  doc["mock"] = {{"seed", 7},
                 {"bias_strength", 0.4},
                 {"biased_values", {"African"}}};
  auto config = load_run_config(write_config(dir, doc));
  run_audit(config);

  CsvFile sims = read_csv(dir / "out" / "similarities.csv");
  REQUIRE(sims.header ==
          std::vector<std::string>{"domain", "metric", "k", "attribute",
                                   "value", "anchor", "profile", "variant",
                                   "variant_value", "similarity", "excluded",
                                   "value_min", "value_max"});
  // 3 metrics × 3 values × 2 anchors, no profile/variant rows
  CHECK(sims.rows.size() == 18);
  std::vector<std::vector<std::string>> keys;
  for (const auto& row : sims.rows) {
    keys.push_back({row.fields[1], row.fields[3], row.fields[4],
                    row.fields[5]});
    CHECK(row.fields[10] == "0");
    // plain rows always carry their per-value min/max
    CHECK_FALSE(row.fields[11].empty());
    CHECK_FALSE(row.fields[12].empty());
    CHECK(row.fields[11] <= row.fields[12]);
  }
  CHECK(std::is_sorted(keys.begin(), keys.end()));

  // biased value scores below the untouched ones under jaccard
  for (const auto& row : sims.rows) {
    if (row.fields[1] != "jaccard") continue;
    if (row.fields[4] == "African") {
      CHECK(std::stod(row.fields[9]) < 1.0);
    } else {
      CHECK(std::stod(row.fields[9]) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("ranking lists attributes by snsv descending") {
  auto dir = fresh_dir("audit_run_rank");
  auto doc = base_config("out");
  doc["attributes"] = {"Continent", "Gender"};
  doc["mock"] = {{"seed", 7},
                 {"bias_strength", 0.6},
                 {"biased_values", {"African"}}};
  auto config = load_run_config(write_config(dir, doc));
  run_audit(config);
  std::string ranking = slurp(dir / "out" / "ranking.txt");
  CHECK(ranking.find("# attributes ranked by SNSV, prag_star@5\n") == 0);
  CHECK(ranking.find("1. Continent") != std::string::npos);
  CHECK(ranking.find("2. Gender") != std::string::npos);
}

TEST_CASE("k sweep file reports per-k means") {
  auto dir = fresh_dir("audit_run_sweep");
  auto doc = base_config("out");
  doc["attributes"] = {"Gender"};
  doc["ks_sweep"] = {1, 3, 5};
  auto config = load_run_config(write_config(dir, doc));
  run_audit(config);
  CsvFile sweep = read_csv(dir / "out" / "k_sweep.csv");
  REQUIRE(sweep.header ==
          std::vector<std::string>{"domain", "metric", "k", "attribute",
                                   "value", "mean_similarity"});
  // jaccard+serp at 3 ks × 2 values = 12; prag only defined at k ≥ 2 → 4
  CHECK(sweep.rows.size() == 16);
  for (const auto& row : sweep.rows) {
    if (row.fields[1] == "prag_star") CHECK(row.fields[2] != "1");
    CHECK(row.fields[5] == "1.000000");  // unbiased mock
  }
}

TEST_CASE("entropy file appears for multi-sample runs") {
  auto dir = fresh_dir("audit_run_entropy");
  auto doc = base_config("out");
  doc["attributes"] = {"Gender"};
  doc["samples_n"] = 3;
  doc["mock"] = {{"seed", 7}, {"noise_temperature", 0.8}};
  auto config = load_run_config(write_config(dir, doc));
  run_audit(config);
  CsvFile entropy = read_csv(dir / "out" / "entropy.csv");
  REQUIRE(entropy.header ==
          std::vector<std::string>{"instance_id", "n", "distinct_items",
                                   "entropy_nats", "normalized_entropy",
                                   "exact_match_rate", "mean_pairwise_jaccard",
                                   "degenerate_flag"});
  CHECK(entropy.rows.size() == 6);  // 2 anchors × (1 neutral + 2 values)
  for (const auto& row : entropy.rows) {
    CHECK(row.fields[1] == "3");
    CHECK(row.fields[7] == "0");
    CHECK(std::stod(row.fields[6]) < 1.0);  // noise shows up in the pairs
  }
}

TEST_CASE("typo perturbation produces a robustness table") {
  auto dir = fresh_dir("audit_run_rob");
  auto doc = base_config("out");
  doc["attributes"] = {"Continent"};
  doc["mock"] = {{"seed", 7},
                 {"bias_strength", 0.5},
                 {"biased_values", {"African"}}};
  doc["perturbations"] = {{{"kind", "typo"}, {"values", {"African"}}}};
  auto config = load_run_config(write_config(dir, doc));
  RunResult result = run_audit(config);
  CHECK(result.instances == 2 * (1 + 3 + 2));

  CsvFile robustness = read_csv(dir / "out" / "robustness.csv");
  REQUIRE(robustness.header ==
          std::vector<std::string>{"domain", "metric", "k", "attribute",
                                   "value", "variant", "variant_value",
                                   "baseline_mean", "variant_mean", "delta"});
  // 3 metrics × 2 typo kinds for the one scoped value
  CHECK(robustness.rows.size() == 6);
  for (const auto& row : robustness.rows) {
    CHECK(row.fields[4] == "African");
    CHECK((row.fields[5] == "typo_delete" || row.fields[5] == "typo_duplicate"));
    CHECK((row.fields[6] == "Afrian" || row.fields[6] == "Africcan"));
    // misspelled value escapes the bias, so the variant scores higher
    CHECK(std::stod(row.fields[9]) > 0.0);
  }
}

TEST_CASE("french run on continent values keeps disparities intact") {
  auto dir = fresh_dir("audit_run_fr");
  auto doc = base_config("out");
  doc["attributes"] = {"Continent"};
  doc["mock"] = {{"seed", 7},
                 {"bias_strength", 0.5},
                 {"biased_values", {"African"}}};
  doc["perturbations"] = {{{"kind", "translate"}, {"language", "fr"}}};
  auto config = load_run_config(write_config(dir, doc));
  run_audit(config);
  CsvFile robustness = read_csv(dir / "out" / "robustness.csv");
  CHECK(robustness.rows.size() == 9);  // 3 metrics × 3 values
  for (const auto& row : robustness.rows) {
    CHECK(row.fields[5] == "fr");
    if (row.fields[4] == "African") CHECK(row.fields[6] == "Africain");
    // same bias in both languages → delta vanishes
    CHECK(std::stod(row.fields[9]) == doctest::Approx(0.0));
  }
}

TEST_CASE("a fatal enumeration error leaves no partial outputs") {
  auto dir = fresh_dir("audit_run_fatal");
  auto doc = base_config("out");  // full registry: "a male" has no French form
  doc["perturbations"] = {{{"kind", "translate"}, {"language", "fr"}}};
  auto config = load_run_config(write_config(dir, doc));
  CHECK_THROWS_AS(run_audit(config), TranslationError);
  CHECK_FALSE(fs::exists(dir / "out" / "similarities.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "summary.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("per-anchor aggregation mode is honored and labeled") {
  auto dir = fresh_dir("audit_run_mode");
  auto doc = base_config("out");
  doc["attributes"] = {"Gender"};
  doc["aggregation_mode"] = "per_anchor_disparity";
  auto config = load_run_config(write_config(dir, doc));
  RunResult result = run_audit(config);
  CHECK(result.summary.mode == AggregationMode::kPerAnchorDisparity);
  auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["aggregation_mode"] == "per_anchor_disparity");
}

TEST_CASE("personality profiles add pafs rows to the summary") {
  auto dir = fresh_dir("audit_run_pafs");
  auto doc = base_config("out");
  doc["attributes"] = {"Gender"};
  doc["personality_profiles"] = {"a highly extraverted", "a highly introverted"};
  auto config = load_run_config(write_config(dir, doc));
  RunResult result = run_audit(config);
  CHECK(result.instances == 2 * (1 + 2 + 2));
  CsvFile summary = read_csv(dir / "out" / "summary.csv");
  // 3 metrics × 1 attribute × 2 stats, plain and pafs
  CHECK(summary.rows.size() == 12);
  int pafs_rows = 0;
  for (const auto& row : summary.rows) {
    if (row.fields[1].rfind("pafs_", 0) == 0) ++pafs_rows;
  }
  CHECK(pafs_rows == 6);
}

TEST_CASE("two warm-cache runs are byte-identical") {
  auto dir = fresh_dir("audit_run_det");
  auto doc = base_config("out_a");
  doc["attributes"] = {"Continent"};
  doc["mock"] = {{"seed", 3},
                 {"bias_strength", 0.3},
                 {"biased_values", {"Asian"}}};
  auto config_a = load_run_config(write_config(dir, doc));
  run_audit(config_a);
  doc["output_dir"] = "out_b";
  auto config_b = load_run_config(write_config(dir, doc));
  run_audit(config_b);
  CHECK(slurp(dir / "out_a" / "similarities.csv") ==
        slurp(dir / "out_b" / "similarities.csv"));
  CHECK(slurp(dir / "out_a" / "summary.csv") ==
        slurp(dir / "out_b" / "summary.csv"));
}
