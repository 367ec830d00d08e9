#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ntsopt/estimate.hpp"

namespace ntsopt::csv {

// Comma-separated table with a header row and a leading label column (dates
// or symbols). No quoting: none of the formats used here contain commas.
struct Table {
  std::vector<std::string> header;  // includes the label column's name
  std::vector<std::string> labels;  // first field of each data row
  Eigen::MatrixXd values;           // rows x (header.size() - 1)
};

// Throws ParseError naming the row/column of the first offending field.
Table read_table(const std::string& path);

// One double rendered with 17 significant digits, enough to round-trip.
std::string format_number(double v);

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::string>& labels, const Eigen::MatrixXd& values);

// Fully formatted rows (callers render non-numeric cells themselves).
void write_rows(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace ntsopt::csv

namespace ntsopt {

// date,SYM1,...,SYMN file. With prices=true the values are price levels and
// the panel holds their log returns (one fewer row than the file).
ReturnPanel load_return_panel(const std::string& path, bool prices);

// Single-value-column file; same prices convention.
std::vector<double> load_series(const std::string& path, bool prices);

}  // namespace ntsopt
