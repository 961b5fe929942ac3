#include "tsdr/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "tsdr/error.hpp"

namespace tsdr {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

double parse_number(std::string_view field, std::size_t line, std::size_t col) {
  if (field.empty()) throw ParseError(line, col, "missing value");
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(line, col, "not a number: '" + std::string(field) + "'");
  if (!std::isfinite(v)) throw ParseError(line, col, "non-finite value");
  return v;
}

}  // namespace

DataSet parse_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::EmptyData, "cannot open '" + path + "'");
  return parse_csv_stream(in, path, opts);
}

DataSet parse_csv_stream(std::istream& in, const std::string& source, const CsvOptions& opts) {
  std::string line;
  std::size_t line_no = 0;
  // Skip leading blank lines; the first non-blank line is the header.
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw Error(ErrorKind::EmptyData, source + ": no header row");
  if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  const auto header = split(line);
  std::optional<std::size_t> y_col, status_col;
  std::vector<std::size_t> x_cols;
  DataSet data;
  for (std::size_t k = 0; k < header.size(); ++k) {
    const std::string name = unquote(header[k]);
    if (name.empty()) throw ParseError(line_no, k + 1, "empty column name");
    if (name == "y") {
      if (y_col) throw ParseError(line_no, k + 1, "duplicate column 'y'");
      y_col = k;
    } else if (name == "status") {
      if (status_col) throw ParseError(line_no, k + 1, "duplicate column 'status'");
      status_col = k;
    } else {
      x_cols.push_back(k);
      data.covariate_names.push_back(name);
    }
  }
  if (!y_col) throw ParseError(line_no, 1, "no column named 'y'");
  if (x_cols.empty() && opts.require_covariates) throw ParseError(line_no, 1, "no covariate columns");

  std::vector<double> xs;
  std::vector<int> status;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, std::min(fields.size(), header.size()) + 1,
                       "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    data.y.push_back(parse_number(fields[*y_col], line_no, *y_col + 1));
    if (status_col) {
      const double s = parse_number(fields[*status_col], line_no, *status_col + 1);
      if (s != 0.0 && s != 1.0) throw ParseError(line_no, *status_col + 1, "status must be 0 or 1");
      status.push_back(static_cast<int>(s));
    }
    for (std::size_t k : x_cols) xs.push_back(parse_number(fields[k], line_no, k + 1));
  }
  const std::size_t n = data.y.size();
  if (n == 0) throw Error(ErrorKind::EmptyData, source + ": no data rows");
  data.x = Matrix(n, x_cols.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < x_cols.size(); ++j) data.x(i, j) = xs[i * x_cols.size() + j];
  if (status_col) data.status = std::move(status);
  data.validate();
  if (opts.require_covariates && n <= data.p() + 1)
    throw Error(ErrorKind::TooFewRows, source + ": " + std::to_string(n) + " rows for " + std::to_string(data.p()) +
                                           " covariates; need n > p + 1");
  return data;
}

void standardize_columns(DataSet& data) {
  const std::size_t n = data.n();
  if (n < 2) throw Error(ErrorKind::TooFewRows, "need at least two rows to standardize columns");
  for (std::size_t j = 0; j < data.p(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.x(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (data.x(i, j) - mean) * (data.x(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      const std::string name = j < data.covariate_names.size() ? data.covariate_names[j] : std::to_string(j + 1);
      throw Error(ErrorKind::InvalidMatrix, "column '" + name + "' is constant");
    }
    for (std::size_t i = 0; i < n; ++i) data.x(i, j) /= sd;
  }
}

void write_csv(std::ostream& out, const DataSet& data) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "y";
  if (data.status) out << ",status";
  for (std::size_t j = 0; j < data.p(); ++j)
    out << ',' << (j < data.covariate_names.size() ? data.covariate_names[j] : "x" + std::to_string(j + 1));
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.y[i];
    if (data.status) out << ',' << (*data.status)[i];
    for (std::size_t j = 0; j < data.p(); ++j) out << ',' << data.x(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace tsdr
