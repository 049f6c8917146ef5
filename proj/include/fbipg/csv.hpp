#pragma once

// Plain numeric CSV: one row per line, comma separated, no header.

#include "fbipg/core.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace fbipg::csv {

namespace detail {

inline double parse_field(std::string_view field, const std::string& where) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw SpecError(where + ": not a decimal literal: '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) throw SpecError(where + ": non-finite entry");
  return value;
}

}  // namespace detail

inline std::vector<std::vector<double>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(detail::parse_field(rest.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw SpecError(where + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline DenseMatrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return DenseMatrix(0, 0);
  DenseMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

inline DenseMatrix read_matrix(const std::filesystem::path& path) {
  return rows_to_matrix(read_rows(path));
}

// Single column, or a single row.
inline Vector read_vector(const std::filesystem::path& path) {
  const auto rows = read_rows(path);
  if (rows.size() == 1) {
    return Eigen::Map<const Vector>(rows[0].data(), static_cast<Index>(rows[0].size()));
  }
  Vector v(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) throw SpecError(path.string() + ": expected a single column");
    v[static_cast<Index>(i)] = rows[i][0];
  }
  return v;
}

inline void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot write " + path.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_vector(const std::filesystem::path& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot write " + path.string());
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

}  // namespace fbipg::csv
