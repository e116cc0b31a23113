#pragma once

#include <map>
#include <string>
#include <vector>

namespace nvespin::csv {

// Header row required; '#' lines and blank lines ignored. Every data row must
// have the header's column count; numeric cells are parsed as double.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 if absent
  bool has_column(const std::string& name) const { return column_index(name) >= 0; }
  // Numeric column by name; throws DataFormatError with the line number.
  std::vector<double> numeric(const std::string& name) const;
  std::vector<long> row_lines;  // 1-based source line of each row
};

Table read_csv(const std::string& path);
Table parse_csv(const std::string& text);

// Deterministic writer: values printed with %.12g.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);

// Atomic write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace nvespin::csv
