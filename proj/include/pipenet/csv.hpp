#pragma once

#include <istream>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pipenet/core.hpp"
#include "pipenet/simulate.hpp"

namespace pipenet::csv {

inline constexpr int kDefaultPrecision = 6;

inline std::string number(double v, int precision = kDefaultPrecision) {
  if (v == 0.0) return "0";  // folds -0
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(precision);
  os << v;
  return os.str();
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

/// Matrix with a header of column labels; the first column holds row labels.
inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& M, const std::vector<std::string>& rows,
                         const std::vector<std::string>& cols, int precision = kDefaultPrecision) {
  if (std::ssize(rows) != M.rows() || std::ssize(cols) != M.cols())
    throw ConfigError("csv: label count does not match matrix shape");
  std::vector<std::string> header{"label"};
  header.insert(header.end(), cols.begin(), cols.end());
  write_row(os, header);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    std::vector<std::string> cells{rows[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < M.cols(); ++j) cells.push_back(number(M(i, j), precision));
    write_row(os, cells);
  }
}

inline void write_series(std::ostream& os, const TimeSeries& ts, int precision = kDefaultPrecision) {
  ts.validate();
  std::vector<std::string> header{"t"};
  header.insert(header.end(), ts.labels.begin(), ts.labels.end());
  write_row(os, header);
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    std::vector<std::string> cells{number(ts.times[k], precision)};
    for (const auto& c : ts.channels) cells.push_back(number(c[k], precision));
    write_row(os, cells);
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& text, std::size_t line) {
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  double v = 0.0;
  if (!(is >> v) || !(is >> std::ws).eof())
    throw ConfigError("csv line " + std::to_string(line) + ": not a number '" + text + "'");
  return v;
}

}  // namespace detail

/// Reads a series whose header starts with "t".
inline TimeSeries read_series(std::istream& is) {
  TimeSeries ts;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = detail::split(line);
    if (!header) {
      if (cells.empty() || cells.front() != "t") throw ConfigError("csv: first header column must be 't'");
      ts.labels.assign(cells.begin() + 1, cells.end());
      ts.channels.resize(ts.labels.size());
      header = true;
      continue;
    }
    if (cells.size() != ts.labels.size() + 1)
      throw ConfigError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(ts.labels.size() + 1) +
                        " columns");
    ts.times.push_back(detail::parse_number(cells[0], lineno));
    for (std::size_t i = 0; i < ts.labels.size(); ++i) ts.channels[i].push_back(detail::parse_number(cells[i + 1], lineno));
  }
  if (!header) throw ConfigError("csv: missing header");
  ts.validate();
  return ts;
}

}  // namespace pipenet::csv
