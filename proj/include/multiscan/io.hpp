#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "multiscan/fts.hpp"

namespace multiscan {

// Malformed input data (as opposed to bad configuration); the CLI maps this
// to its own exit code.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline bool try_parse_number(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && !cell.empty();
}

// 1-based row/column coordinates in error messages, matching what a user
// sees in a spreadsheet.
inline double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  if (!try_parse_number(cell, v))
    throw FormatError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                      ": '" + cell + "' is not a number");
  return v;
}

// Non-blank lines of a text file, each tagged with its 1-based line number.
inline std::vector<std::pair<std::size_t, std::string>> read_csv_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    lines.emplace_back(lineno, line);
  }
  return lines;
}

}  // namespace detail

// Curve CSV: one row per time point, D comma-separated values.  Options:
// `grid_header` reads the first row as grid coordinates (quadrature weights
// by the trapezoid rule); `label_column` consumes the first cell of every
// data row as an opaque label (e.g. a date), carried through to reports.
struct CurveData {
  FtsSample sample;
  std::vector<std::string> labels;  // empty unless a label column was read
};

inline CurveData ingest_curves(const std::string& path, bool label_column = false,
                               bool grid_header = false) {
  const auto lines = detail::read_csv_lines(path);
  std::size_t next = 0;

  Eigen::VectorXd grid_points;
  if (grid_header) {
    if (lines.empty()) throw FormatError("'" + path + "': missing grid header row");
    const auto& [lineno, text] = lines[next++];
    auto cells = detail::split_csv_line(text);
    // With a label column the header's first cell sits above the labels;
    // it is ignored (it may be empty or a column title).
    if (label_column && !cells.empty()) cells.erase(cells.begin());
    grid_points.resize(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      grid_points[j] = detail::parse_number(cells[j], lineno, j + 1 + (label_column ? 1 : 0));
  }

  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  for (; next < lines.size(); ++next) {
    const auto& [lineno, text] = lines[next];
    auto cells = detail::split_csv_line(text);
    if (label_column) {
      labels.push_back(cells.front());
      cells.erase(cells.begin());
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw FormatError("row " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size() + (label_column ? 1 : 0)) +
                        " cells, expected " + std::to_string(width + (label_column ? 1 : 0)));
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j)
      row[j] = detail::parse_number(cells[j], lineno, j + 1 + (label_column ? 1 : 0));
    rows.push_back(std::move(row));
  }

  if (rows.size() < 4)
    throw FormatError("'" + path + "': need at least 4 curves, found " +
                      std::to_string(rows.size()));
  if (width < 1) throw FormatError("'" + path + "': rows carry no values");

  Eigen::MatrixXd data(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) data(i, j) = rows[i][j];

  Grid grid;
  try {
    grid = grid_header ? trapezoid_grid(std::move(grid_points))
                       : Grid::uniform01(static_cast<int>(width));
    if (grid.size() != static_cast<int>(width))
      throw std::invalid_argument("grid header has " + std::to_string(grid.size()) +
                                  " coordinates for " + std::to_string(width) + " columns");
    return CurveData{make_sample(std::move(grid), std::move(data)), std::move(labels)};
  } catch (const std::invalid_argument& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

// Panel CSV in long format: columns n, m, y with integer indices starting at
// 1; every time point must carry the same number of draws.  An optional
// non-numeric header row is skipped.  Returns the draws as an N x M matrix.
struct PanelData {
  Eigen::MatrixXd draws;  // row n-1 holds y_{n,1..M}
};

inline PanelData ingest_panel(const std::string& path) {
  auto lines = detail::read_csv_lines(path);
  std::size_t next = 0;
  if (!lines.empty()) {
    double probe = 0.0;
    const auto cells = detail::split_csv_line(lines[0].second);
    if (!cells.empty() && !detail::try_parse_number(cells[0], probe)) next = 1;  // header row
  }

  std::map<std::pair<long, long>, double> entries;
  long max_n = 0, max_m = 0;
  for (; next < lines.size(); ++next) {
    const auto& [lineno, text] = lines[next];
    const auto cells = detail::split_csv_line(text);
    if (cells.size() != 3)
      throw FormatError("row " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected 3 (n, m, y)");
    const double n_raw = detail::parse_number(cells[0], lineno, 1);
    const double m_raw = detail::parse_number(cells[1], lineno, 2);
    const double y = detail::parse_number(cells[2], lineno, 3);
    const long n = static_cast<long>(n_raw);
    const long m = static_cast<long>(m_raw);
    if (double(n) != n_raw || double(m) != m_raw || n < 1 || m < 1)
      throw FormatError("row " + std::to_string(lineno) +
                        ": n and m must be positive integers");
    if (!entries.emplace(std::make_pair(n, m), y).second)
      throw FormatError("row " + std::to_string(lineno) + ": duplicate entry for (n=" +
                        std::to_string(n) + ", m=" + std::to_string(m) + ")");
    max_n = std::max(max_n, n);
    max_m = std::max(max_m, m);
  }
  if (entries.empty()) throw FormatError("'" + path + "': no panel rows");

  // Contiguity: all (n, m) in 1..N x 1..M must be present.
  if (entries.size() != static_cast<std::size_t>(max_n) * static_cast<std::size_t>(max_m)) {
    std::string missing;
    int shown = 0;
    for (long n = 1; n <= max_n && shown < 5; ++n)
      for (long m = 1; m <= max_m && shown < 5; ++m)
        if (!entries.count({n, m})) {
          missing += (shown ? ", " : "") + std::string("(") + std::to_string(n) + "," +
                     std::to_string(m) + ")";
          ++shown;
        }
    throw FormatError("'" + path + "': panel is not a full 1..N x 1..M grid; missing " +
                      missing + (shown == 5 ? ", ..." : ""));
  }

  PanelData panel;
  panel.draws.resize(max_n, max_m);
  for (const auto& [key, y] : entries) panel.draws(key.first - 1, key.second - 1) = y;
  if (!panel.draws.allFinite()) throw FormatError("'" + path + "': values must be finite");
  return panel;
}

// Histogram of detected locations as CSV (location, count), ascending, one
// row per distinct location; the header is always written, so an empty
// collection produces a header-only file.
inline void emit_histogram(const std::vector<int>& locations, std::ostream& out) {
  std::map<int, long> counts;
  for (int loc : locations) ++counts[loc];
  out << "location,count\n";
  for (const auto& [loc, count] : counts) out << loc << "," << count << "\n";
}

inline void emit_histogram(const std::vector<int>& locations, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  emit_histogram(locations, out);
}

}  // namespace multiscan
