#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace audit {

/// One parsed CSV file: header row plus data rows, each row keeping the
/// 1-based line number it came from for error reporting.
struct CsvFile {
  std::vector<std::string> header;
  struct Row {
    int line_number;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;
};

/// RFC-4180 reader: quoted fields, embedded commas, doubled quotes,
/// multi-line quoted fields. Throws IoError on a missing file or a row
/// whose quoting is malformed (message carries the line number).
CsvFile read_csv(const std::filesystem::path& path);

/// Quote a field per RFC 4180 when it needs it.
std::string csv_escape(const std::string& field);

/// Deterministic CSV emitter; rows are written exactly in the order given.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> fields);
  std::string str() const;
  size_t row_count() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace audit
