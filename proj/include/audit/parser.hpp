#pragma once

#include <string>
#include <utility>
#include <vector>

namespace audit {

struct RankedList {
  std::vector<std::string> items;  // canonical, deduplicated, ≤ k_requested
  int k_requested = 0;
  std::string source_instance_id;

  bool operator==(const RankedList&) const = default;
};

struct ParseReport {
  int raw_line_count = 0;
  int parsed_count = 0;  // = items kept + duplicates_removed
  int duplicates_removed = 0;
  bool short_list = false;
  std::vector<std::pair<int, std::string>> unparseable_lines;
};

// Canonical title form. Peels enumeration markers and wrapping quotes to a
// fixed point (they stack, as in a quoted numbered entry), drops at most one
// trailing parenthetical (the year/edition tag), collapses whitespace runs and
// ASCII-lowercases.
std::string normalize_title(const std::string& raw);

// Extracts at most k unique normalized titles from raw model text.
// Enumerated/bulleted lines win when any exist; otherwise the text is accepted
// as a bare list only when it has at least two plain lines of ≤200 chars —
// a single prose line reads as a refusal. Throws EmptyListError when nothing
// survives.
std::pair<RankedList, ParseReport> parse_list(
    const std::string& raw_text, int k,
    const std::string& source_instance_id = {});

// Renders items back as "1. ..." lines, one per item.
std::string render_numbered(const RankedList& list);

}  // namespace audit
