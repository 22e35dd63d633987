#include "otsym/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "otsym/error.hpp"

namespace otsym {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  const bool delimited = line.find_first_of(",;") != std::string::npos;
  if (delimited) {
    std::string cell;
    for (char c : line) {
      if (c == ',' || c == ';') {
        cells.push_back(trim(cell));
        cell.clear();
      } else {
        cell.push_back(c);
      }
    }
    cells.push_back(trim(cell));
  } else {
    std::istringstream ss(line);
    std::string cell;
    while (ss >> cell) cells.push_back(cell);
  }
  return cells;
}

bool parse_number(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  value = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size() && errno != ERANGE;
}

[[noreturn]] void fail(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + why);
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_cells(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!parse_number(cells[k], row[k])) {
        numeric = false;
        bad = k;
        break;
      }
    }
    if (!numeric) {
      // A header is a first row where nothing parses.
      if (first_content) {
        bool any = false;
        double tmp = 0.0;
        for (const auto& c : cells) any = any || parse_number(c, tmp);
        if (!any) {
          first_content = false;
          continue;
        }
      }
      fail(lineno, "cannot parse '" + cells[bad] + "' as a number");
    }
    first_content = false;
    for (double v : row)
      if (!std::isfinite(v)) fail(lineno, "non-finite value");
    if (!rows.empty() && row.size() != rows.front().size())
      fail(lineno, "expected " + std::to_string(rows.front().size()) + " columns, found " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, "no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return m;
}

Eigen::MatrixXd read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
  return read_csv_matrix(in);
}

std::vector<Eigen::MatrixXd> read_matrix_blocks(std::istream& in) {
  std::vector<Eigen::MatrixXd> out;
  std::string raw;
  std::string block;
  auto flush = [&] {
    if (trim(block).empty()) return;
    std::istringstream ss(block);
    Eigen::MatrixXd m = read_csv_matrix(ss);
    if (m.rows() != m.cols())
      throw Error(ErrorCode::Parse, "matrix block " + std::to_string(out.size() + 1) + " is not square");
    if (!out.empty() && m.rows() != out.front().rows())
      throw Error(ErrorCode::Parse, "matrix blocks differ in size");
    out.push_back(std::move(m));
    block.clear();
  };
  while (std::getline(in, raw)) {
    const std::string line = trim(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    block += line;
    block += '\n';
  }
  flush();
  if (out.empty()) throw Error(ErrorCode::Parse, "no matrices found");
  return out;
}

std::string format_exact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_sig6(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

}  // namespace otsym
