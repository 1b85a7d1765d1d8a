#include "audit/csv.hpp"

#include <fstream>
#include <sstream>

#include "audit/errors.hpp"

namespace audit {

namespace {

// Splits one logical CSV record. `line_number` is where the record starts.
std::vector<std::string> parse_record(const std::string& record,
                                      int line_number) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  size_t i = 0;
  while (i < record.size()) {
    char c = record[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < record.size() && record[i + 1] == '"') {
          current.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      current.push_back(c);
      ++i;
      continue;
    }
    if (c == '"') {
      if (!current.empty()) {
        throw IoError("malformed CSV row at line " +
                      std::to_string(line_number) +
                      ": quote inside unquoted field");
      }
      in_quotes = true;
      ++i;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
      ++i;
      continue;
    }
    current.push_back(c);
    ++i;
  }
  if (in_quotes) {
    throw IoError("malformed CSV row at line " + std::to_string(line_number) +
                  ": unterminated quoted field");
  }
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace

CsvFile read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string content = buf.str();

  CsvFile out;
  std::string record;
  int record_start_line = 1;
  int current_line = 1;
  bool in_quotes = false;
  bool have_header = false;

  auto flush_record = [&]() {
    if (!have_header) {
      out.header = parse_record(record, record_start_line);
      have_header = true;
    } else if (!record.empty()) {
      out.rows.push_back({record_start_line,
                          parse_record(record, record_start_line)});
    }
    record.clear();
  };

  for (size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (c == '"') {
      in_quotes = !in_quotes;
      record.push_back(c);
    } else if (c == '\r' && !in_quotes) {
      // swallow; the \n that follows ends the record
    } else if (c == '\n' && !in_quotes) {
      flush_record();
      ++current_line;
      record_start_line = current_line;
    } else {
      if (c == '\n') {
        ++current_line;
      }
      record.push_back(c);
    }
  }
  if (in_quotes) {
    throw IoError("malformed CSV row at line " +
                  std::to_string(record_start_line) +
                  ": unterminated quoted field");
  }
  if (!record.empty()) {
    flush_record();
  }
  if (!have_header) {
    throw IoError("empty CSV file (no header row): " + path.string());
  }
  return out;
}

std::string csv_escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> fields) {
  rows_.push_back(std::move(fields));
}

std::string CsvWriter::str() const {
  std::string out;
  for (size_t i = 0; i < header_.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(header_[i]);
  }
  out.push_back('\n');
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_escape(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace audit
