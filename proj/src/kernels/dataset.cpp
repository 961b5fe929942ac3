#include "tsdr/dataset.hpp"

#include <cmath>
#include <string>

#include "tsdr/error.hpp"

namespace tsdr {

void DataSet::validate() const {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyData, "data set has no rows");
  if (y.size() != x.rows())
    throw Error(ErrorKind::DimensionError, "response length " + std::to_string(y.size()) +
                                               " does not match " + std::to_string(x.rows()) + " rows");
  if (!all_finite(x)) throw Error(ErrorKind::InvalidMatrix, "covariates contain non-finite values");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidMatrix, "response contains non-finite values");
  if (status) {
    if (status->size() != x.rows())
      throw Error(ErrorKind::DimensionError, "status length does not match row count");
    for (int s : *status)
      if (s != 0 && s != 1) throw Error(ErrorKind::InvalidMatrix, "status must be 0 or 1");
  }
  if (!covariate_names.empty() && covariate_names.size() != x.cols())
    throw Error(ErrorKind::DimensionError, "covariate names do not match column count");
}

void DataSet::require_estimable() const {
  validate();
  if (n() <= p() + 1)
    throw Error(ErrorKind::TooFewRows, "need n > p + 1 (n = " + std::to_string(n()) +
                                           ", p = " + std::to_string(p()) + ")");
}

}  // namespace tsdr
