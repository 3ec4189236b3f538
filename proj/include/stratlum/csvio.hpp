#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stratlum/errors.hpp"

namespace stratlum::csv {

inline std::string format_number(double v, int significant_digits = 9) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != header.size())
      throw InputError("CSV row width does not match the header");
    rows.push_back(std::move(row));
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
      out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << row[i];
      out << '\n';
    }
    if (!out) throw InputError("failed while writing '" + path + "'");
  }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r'))
      cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    cells.push_back(cell.substr(b));
  }
  return cells;
}

// Reads a two-column numeric CSV whose header must name the expected columns.
inline std::vector<std::pair<double, double>> read_xy(
    const std::string& path, const std::string& x_name,
    const std::string& y_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!split_line(line).empty()) break;
  }
  const auto header = split_line(line);
  if (header.size() < 2 || header[0] != x_name || header[1] != y_name)
    throw ParseError("expected CSV header '" + x_name + "," + y_name +
                         "' in '" + path + "'",
                     lineno);
  std::vector<std::pair<double, double>> points;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cells = split_line(line);
    if (cells.empty()) continue;
    if (cells.size() < 2)
      throw ParseError("row needs two columns in '" + path + "'", lineno);
    try {
      std::size_t ex = 0, ey = 0;
      const double x = std::stod(cells[0], &ex);
      const double y = std::stod(cells[1], &ey);
      if (ex != cells[0].size() || ey != cells[1].size())
        throw std::invalid_argument("trailing characters");
      points.emplace_back(x, y);
    } catch (const std::exception&) {
      throw ParseError("could not parse numbers '" + cells[0] + "', '" +
                           cells[1] + "' in '" + path + "'",
                       lineno);
    }
  }
  if (points.empty())
    throw ParseError("data file '" + path + "' contains no data rows", lineno);
  return points;
}

} // namespace stratlum::csv
