#include "audit/parser.hpp"

#include <cctype>
#include <set>

#include "audit/errors.hpp"
#include "audit/util.hpp"

namespace audit {
namespace {

constexpr const char* kBullet = "\xe2\x80\xa2";  // U+2022

// "12." / "12)" / "-" / "•" prefixes; returns the remainder or nullopt-like
// pair {found, rest}.
std::pair<bool, std::string> strip_marker(const std::string& line) {
  size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    ++i;
  }
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    return {true, line.substr(i + 1)};
  }
  if (!line.empty() && line[0] == '-') {
    return {true, line.substr(1)};
  }
  if (starts_with(line, kBullet)) {
    return {true, line.substr(3)};
  }
  return {false, line};
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  bool in_gap = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_gap = true;
      continue;
    }
    if (in_gap && !out.empty()) out.push_back(' ');
    in_gap = false;
    out.push_back(c);
  }
  return out;
}

std::string strip_markup_once(const std::string& raw) {
  std::string s = trim(raw);
  auto [marked, rest] = strip_marker(s);
  if (marked) s = trim(rest);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') &&
      s.back() == s.front()) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

// Markers and wrapping quotes can stack ("2) - \"Nested\""), so peel until
// stable.
std::string strip_markup(const std::string& raw) {
  std::string current = trim(raw);
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = strip_markup_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace

std::string normalize_title(const std::string& raw) {
  std::string s = strip_markup(raw);
  // At most one trailing parenthetical goes — the year/edition tag — so a
  // second group or an intrinsic one ("(What's the Story) Morning Glory?")
  // survives. Stripping it can expose more markup, hence the second peel.
  if (!s.empty() && s.back() == ')') {
    size_t open = s.rfind('(');
    if (open != std::string::npos && open > 0) {
      s = strip_markup(s.substr(0, open));
    }
  }
  return to_lower_ascii(collapse_whitespace(s));
}

std::pair<RankedList, ParseReport> parse_list(
    const std::string& raw_text, int k, const std::string& source_instance_id) {
  std::vector<std::string> lines = split_lines(raw_text);

  ParseReport report;
  report.raw_line_count = static_cast<int>(lines.size());

  bool any_marked = false;
  std::vector<bool> marked(lines.size(), false);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string trimmed = trim(lines[i]);
    if (trimmed.empty()) continue;
    marked[i] = strip_marker(trimmed).first;
    any_marked = any_marked || marked[i];
  }

  size_t plain_candidates = 0;
  if (!any_marked) {
    for (const auto& line : lines) {
      std::string trimmed = trim(line);
      if (!trimmed.empty() && trimmed.size() <= 200) ++plain_candidates;
    }
  }

  RankedList list;
  list.k_requested = k;
  list.source_instance_id = source_instance_id;
  std::set<std::string> seen;

  for (size_t i = 0; i < lines.size(); ++i) {
    if (static_cast<int>(list.items.size()) >= k) break;
    std::string trimmed = trim(lines[i]);
    if (trimmed.empty()) continue;

    bool candidate;
    if (any_marked) {
      candidate = marked[i];
    } else {
      candidate = plain_candidates >= 2 && trimmed.size() <= 200;
    }
    if (!candidate) {
      report.unparseable_lines.emplace_back(static_cast<int>(i) + 1, trimmed);
      continue;
    }

    std::string title = normalize_title(trimmed);
    if (title.empty()) {
      report.unparseable_lines.emplace_back(static_cast<int>(i) + 1, trimmed);
      continue;
    }
    ++report.parsed_count;
    if (!seen.insert(title).second) {
      ++report.duplicates_removed;
      continue;
    }
    list.items.push_back(std::move(title));
  }

  if (list.items.empty()) {
    throw EmptyListError("no list items found in completion" +
                         (source_instance_id.empty()
                              ? std::string{}
                              : " for instance " + source_instance_id));
  }
  report.short_list = static_cast<int>(list.items.size()) < k;
  return {std::move(list), std::move(report)};
}

std::string render_numbered(const RankedList& list) {
  std::string out;
  for (size_t i = 0; i < list.items.size(); ++i) {
    out += std::to_string(i + 1);
    out += ". ";
    out += list.items[i];
    out += '\n';
  }
  return out;
}

}  // namespace audit
