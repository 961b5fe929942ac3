#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsdr/matrix.hpp"

namespace tsdr {

// Covariates with a response and, for censored data, the event indicator
// (1 = event observed, 0 = censored). For censored data `y` holds Y* = min(Y, C).
struct DataSet {
  Matrix x;
  Vector y;
  std::optional<std::vector<int>> status;
  std::vector<std::string> covariate_names;

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t p() const noexcept { return x.cols(); }
  bool censored() const noexcept { return status.has_value(); }

  // Shapes agree, entries finite, status in {0,1}. Throws on violation.
  void validate() const;
  // validate() plus n > p + 1, which estimation entry points require.
  void require_estimable() const;
};

}  // namespace tsdr
