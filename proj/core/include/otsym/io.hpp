#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace otsym {

/// Reads a numeric CSV (comma, semicolon or whitespace separated). A first
/// row that does not parse as numbers is taken as a header; lines starting
/// with '#' and blank lines are skipped. Non-finite values, ragged rows and
/// unparsable cells raise Error(Parse) naming the 1-based line number.
Eigen::MatrixXd read_csv_matrix(std::istream& in);
Eigen::MatrixXd read_csv_file(const std::string& path);

/// Reads a list of p x p matrices: blocks of p rows separated by blank lines.
std::vector<Eigen::MatrixXd> read_matrix_blocks(std::istream& in);

/// Shortest round-trip representation (%.17g).
std::string format_exact(double value);

/// 6 significant digits (%.6g).
std::string format_sig6(double value);

}  // namespace otsym
