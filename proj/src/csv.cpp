#include "nvespin/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nvespin/errors.hpp"

namespace nvespin::csv {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

int Table::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> Table::numeric(const std::string& name) const {
  const int c = column_index(name);
  if (c < 0) throw DataFormatError("missing column '" + name + "'", 1);
  std::vector<double> out;
  out.reserve(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    try {
      size_t pos = 0;
      const double v = std::stod(rows[r][c], &pos);
      if (pos != rows[r][c].size()) throw std::invalid_argument("trailing");
      out.push_back(v);
    } catch (const std::exception&) {
      throw DataFormatError("non-numeric value '" + rows[r][c] + "' in column '" + name + "'",
                            row_lines[r]);
    }
  }
  return out;
}

Table parse_csv(const std::string& text) {
  Table t;
  std::stringstream ss(text);
  std::string line;
  long lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto cells = split_row(s);
    if (t.columns.empty()) {
      t.columns = std::move(cells);
      continue;
    }
    if (cells.size() != t.columns.size())
      throw DataFormatError("expected " + std::to_string(t.columns.size()) + " cells, got " +
                                std::to_string(cells.size()),
                            lineno);
    t.rows.push_back(std::move(cells));
    t.row_lines.push_back(lineno);
  }
  if (t.columns.empty()) throw DataFormatError("missing header row", lineno ? lineno : 1);
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open '" + path + "'", 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
  }
  fs::rename(tmp, target);
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (size_t i = 0; i < columns.size(); ++i) {
    out += columns[i];
    out += (i + 1 < columns.size()) ? "," : "\n";
  }
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      out += (i + 1 < row.size()) ? "," : "\n";
    }
  }
  write_file_atomic(path, out);
}

}  // namespace nvespin::csv
