#pragma once

#include <iosfwd>
#include <string>

#include "tsdr/dataset.hpp"

namespace tsdr {

// Header row required. Column `y` is the response, an optional `status`
// column (0/1) marks events, every other column is a numeric covariate.
// Lines and columns in ParseError are 1-based; the header is line 1.
struct CsvOptions {
  // Off for inputs that only need (y, status), such as Kaplan-Meier curves.
  bool require_covariates = true;
};

DataSet parse_csv(const std::string& path, const CsvOptions& opts = {});
DataSet parse_csv_stream(std::istream& in, const std::string& source = "<stream>", const CsvOptions& opts = {});

// X_j / sd(X_j) with the n−1 sample standard deviation.
void standardize_columns(DataSet& data);

void write_csv(std::ostream& out, const DataSet& data);

}  // namespace tsdr
