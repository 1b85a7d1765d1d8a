#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "audit/errors.hpp"
#include "audit/parser.hpp"
#include "audit/util.hpp"

using namespace audit;

TEST_CASE("normalize_title rule application") {
  CHECK(normalize_title("3. \"Billie Jean\"") == "billie jean");
  CHECK(normalize_title("- Inception (2010)") == "inception");
  CHECK(normalize_title("   Thriller  ") == "thriller");
  CHECK(normalize_title("12) Back in Black") == "back in black");
  CHECK(normalize_title("\xe2\x80\xa2 Purple Rain") == "purple rain");
  CHECK(normalize_title("'Single Quotes'") == "single quotes");
  CHECK(normalize_title("Two   Spaced\tWords") == "two spaced words");
}

TEST_CASE("normalize_title strips layered markup to a fixpoint") {
  CHECK(normalize_title("1. \"Inception (2010)\"") == "inception");
  CHECK(normalize_title("2) - \"Nested\"") == "nested");
}

TEST_CASE("normalize_title keeps interior parentheticals") {
  CHECK(normalize_title("(What's the Story) Morning Glory?") ==
        "(what's the story) morning glory?");
  // only the final parenthetical goes, and only one
  CHECK(normalize_title("Help! (Remastered) (1965)") == "help! (remastered)");
}

TEST_CASE("normalize_title is idempotent") {
  const std::vector<std::string> cases = {
      "3. \"Billie Jean\"", "- Inception (2010)", "  plain  title ",
      "10) 'Quoted' (Live)", "\xe2\x80\xa2 Dot", "(keep) me", "a",
      "Multiple   internal\t\tgaps (2001)"};
  for (const auto& raw : cases) {
    std::string once = normalize_title(raw);
    CHECK(normalize_title(once) == once);
  }
}

TEST_CASE("parse_list numbered happy path") {
  auto [list, report] = parse_list("1. A\n2. B\n3. A\n4. C", 25);
  CHECK(list.items == std::vector<std::string>{"a", "b", "c"});
  CHECK(report.duplicates_removed == 1);
  CHECK(report.short_list);
  CHECK(report.parsed_count == static_cast<int>(list.items.size()) +
                                   report.duplicates_removed);
}

TEST_CASE("parse_list full-length list") {
  std::string text;
  for (int i = 1; i <= 25; ++i) {
    text += std::to_string(i) + ". Title " + std::to_string(i) + "\n";
  }
  auto [list, report] = parse_list(text, 25);
  CHECK(list.items.size() == 25);
  CHECK_FALSE(report.short_list);
  CHECK(list.items[0] == "title 1");
  CHECK(list.items[24] == "title 25");
}

TEST_CASE("parse_list stops at k uniques") {
  auto [list, report] = parse_list("1. A\n2. B\n3. C\n4. D", 2);
  CHECK(list.items == std::vector<std::string>{"a", "b"});
  CHECK(list.k_requested == 2);
  CHECK_FALSE(report.short_list);
}

TEST_CASE("refusal text is a typed empty-list error") {
  CHECK_THROWS_AS(parse_list("I'm sorry, I can't help with that.", 25),
                  EmptyListError);
  try {
    parse_list("I'm sorry, I can't help with that.", 25);
  } catch (const EmptyListError& e) {
    CHECK(e.kind() == "empty_list");
  }
  CHECK_THROWS_AS(parse_list("", 25), EmptyListError);
  CHECK_THROWS_AS(parse_list("\n\n\n", 25), EmptyListError);
}

TEST_CASE("bare lists need at least two plausible lines") {
  auto [list, report] = parse_list("Billie Jean\nThriller\nBad", 25);
  CHECK(list.items == std::vector<std::string>{"billie jean", "thriller", "bad"});

  // a single plain line reads as prose, not a list
  CHECK_THROWS_AS(parse_list("Just one plain sentence", 25), EmptyListError);
}

TEST_CASE("bare mode skips over-long prose lines") {
  std::string prose(250, 'x');
  auto [list, report] = parse_list("Alpha\n" + prose + "\nBeta", 25);
  CHECK(list.items == std::vector<std::string>{"alpha", "beta"});
  REQUIRE(report.unparseable_lines.size() == 1);
  CHECK(report.unparseable_lines[0].first == 2);
}

TEST_CASE("marked mode ignores surrounding prose") {
  auto [list, report] = parse_list(
      "Sure! Here are some songs you might enjoy:\n"
      "1. Billie Jean\n"
      "2. Thriller\n"
      "Enjoy the music!",
      25);
  CHECK(list.items == std::vector<std::string>{"billie jean", "thriller"});
  CHECK(report.raw_line_count == 4);
  CHECK(report.unparseable_lines.size() == 2);
}

TEST_CASE("item order is stable") {
  auto [list, report] = parse_list("1. Zebra\n2. Apple\n3. Mango", 25);
  CHECK(list.items == std::vector<std::string>{"zebra", "apple", "mango"});
}

TEST_CASE("render and reparse round-trips the items") {
  auto [first, first_report] =
      parse_list("1. \"Billie Jean\"\n2. Thriller (1982)\n3. Bad", 25);
  std::string rendered = render_numbered(first);
  auto [second, second_report] = parse_list(rendered, 25);
  CHECK(second.items == first.items);
}

TEST_CASE("source instance id is carried through") {
  auto [list, report] = parse_list("1. A\n2. B", 25, "abc123");
  CHECK(list.source_instance_id == "abc123");
}
