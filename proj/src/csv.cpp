#include "ntsopt/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string_view>

#include "ntsopt/errors.hpp"

namespace ntsopt::csv {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, std::size_t row, std::size_t col) {
  std::string_view sv(field);
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size())
    throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                     ": cannot parse '" + field + "' as a number");
  return v;
}

}  // namespace

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::vector<std::vector<std::string>> records;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;  // tolerate blank lines between records
    records.push_back(split_line(line));
  }
  if (records.empty()) throw ParseError("'" + path + "' is empty");

  Table t;
  t.header = records.front();
  if (t.header.size() < 2)
    throw ParseError("'" + path + "': header needs a label column and at least one value column");

  const std::size_t cols = t.header.size();
  const std::size_t rows = records.size() - 1;
  t.labels.reserve(rows);
  t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols - 1));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& rec = records[r + 1];
    // Rows are numbered as they appear in the file, header included.
    const std::size_t file_row = r + 2;
    if (rec.size() != cols)
      throw ParseError("'" + path + "': row " + std::to_string(file_row) + " has " +
                       std::to_string(rec.size()) + " fields, expected " + std::to_string(cols));
    t.labels.push_back(rec[0]);
    for (std::size_t c = 1; c < cols; ++c)
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
          parse_number(rec[c], file_row, c + 1);
  }
  return t;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_rows(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_rows: row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  if (!out) throw ParseError("failed while writing '" + path + "'");
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::string>& labels, const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(labels.size()) != values.rows())
    throw std::invalid_argument("write_table: label count does not match the value rows");
  if (static_cast<Eigen::Index>(header.size()) != values.cols() + 1)
    throw std::invalid_argument("write_table: header width does not match the value columns");
  std::vector<std::vector<std::string>> rows(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    rows[r].push_back(labels[r]);
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      rows[r].push_back(format_number(values(static_cast<Eigen::Index>(r), c)));
  }
  write_rows(path, header, rows);
}

}  // namespace ntsopt::csv

namespace ntsopt {

namespace {

ReturnPanel panel_from_table(const csv::Table& t, const std::string& path, bool prices) {
  ReturnPanel panel;
  panel.assets.assign(t.header.begin() + 1, t.header.end());
  if (!prices) {
    panel.dates = t.labels;
    panel.returns = t.values;
    panel.validate();
    return panel;
  }
  if (t.values.rows() < 3)
    throw ParseError("'" + path + "': need at least three price rows to form returns");
  if (!(t.values.array() > 0.0).all())
    throw ParseError("'" + path + "': price levels must be positive to take log returns");
  panel.dates.assign(t.labels.begin() + 1, t.labels.end());
  const Eigen::MatrixXd logp = t.values.array().log();
  panel.returns = logp.bottomRows(logp.rows() - 1) - logp.topRows(logp.rows() - 1);
  panel.validate();
  return panel;
}

}  // namespace

ReturnPanel load_return_panel(const std::string& path, bool prices) {
  return panel_from_table(csv::read_table(path), path, prices);
}

std::vector<double> load_series(const std::string& path, bool prices) {
  const csv::Table t = csv::read_table(path);
  if (t.values.cols() != 1)
    throw ParseError("'" + path + "': expected exactly one value column");
  const ReturnPanel panel = panel_from_table(t, path, prices);
  const Eigen::VectorXd col = panel.returns.col(0);
  return {col.data(), col.data() + col.size()};
}

}  // namespace ntsopt
