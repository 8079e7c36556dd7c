#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "dspike/data.hpp"

namespace dspike {

/// Shortest text that is guaranteed to read back to the same double: 17
/// significant digits.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& path, std::size_t row, std::string column, const std::string& what)
      : std::runtime_error(path + ": row " + std::to_string(row) +
                           (column.empty() ? "" : ", column '" + column + "'") + ": " + what),
        row_(row),
        column_(std::move(column)) {}

  /// 1-based data row (0 for the header).
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

/// A numeric table with a header row.
struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x columns

  std::ptrdiff_t column_index(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<std::ptrdiff_t>(j);
    return -1;
  }
};

/// Reads a comma-separated numeric table. Empty or non-numeric cells are
/// errors naming the row and column.
inline NumericTable read_numeric_table(std::istream& in, const std::string& source = "<input>") {
  NumericTable table;
  std::string line;
  if (!std::getline(in, line)) throw CsvError(source, 0, "", "missing header row");
  for (auto h : detail::split(line, ',')) {
    if (h.empty()) throw CsvError(source, 0, "", "empty column name in header");
    table.header.emplace_back(h);
  }
  std::map<std::string_view, int> seen;
  for (const auto& h : table.header) {
    if (seen[h]++ > 0) throw CsvError(source, 0, h, "duplicate column name");
  }
  const std::size_t cols = table.header.size();
  std::vector<double> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    auto fields = detail::split(line, ',');
    if (fields.size() != cols) {
      throw CsvError(source, row, "",
                     "expected " + std::to_string(cols) + " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (fields[j].empty()) throw CsvError(source, row, table.header[j], "missing value");
      double v = 0.0;
      if (!detail::parse_double(fields[j], v) || !std::isfinite(v)) {
        throw CsvError(source, row, table.header[j],
                       "non-numeric value '" + std::string(fields[j]) + "'");
      }
      cells.push_back(v);
    }
  }
  table.values.resize(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < row; ++r)
    for (std::size_t j = 0; j < cols; ++j)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cells[r * cols + j];
  return table;
}

inline NumericTable read_numeric_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_numeric_table(in, path);
}

/// Panel with named forecaster columns.
struct Panel {
  EnsembleData data;
  std::vector<std::string> columns;  // names of the X columns, in order
  std::string target;
};

inline Panel panel_from_table(const NumericTable& table, const std::string& target,
                              const std::string& source = "<input>") {
  const std::ptrdiff_t t = table.column_index(target);
  if (t < 0) throw CsvError(source, 0, target, "target column not found");
  const auto n = table.values.rows();
  const auto K = static_cast<Eigen::Index>(table.header.size()) - 1;
  if (K < 2) throw CsvError(source, 0, "", "need at least two forecaster columns");
  if (n < 1) throw CsvError(source, 0, "", "no data rows");
  Panel p;
  p.target = target;
  Eigen::MatrixXd X(n, K);
  Eigen::Index out = 0;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) == t) continue;
    X.col(out++) = table.values.col(static_cast<Eigen::Index>(j));
    p.columns.push_back(table.header[j]);
  }
  p.data = EnsembleData(std::move(X), table.values.col(t));
  return p;
}

/// Reads a panel file: the target column becomes y, every other column
/// becomes a column of X in header order.
inline Panel ingest_csv(const std::string& path, const std::string& target) {
  return panel_from_table(read_numeric_table(path), target, path);
}

inline void write_panel(std::ostream& out, const Panel& p) {
  out << p.target;
  for (const auto& c : p.columns) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < p.data.n(); ++i) {
    out << format_double(p.data.y()[i]);
    for (Eigen::Index j = 0; j < p.data.K(); ++j) out << ',' << format_double(p.data.X()(i, j));
    out << '\n';
  }
}

/// Opens `path` for writing or throws.
inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace dspike
