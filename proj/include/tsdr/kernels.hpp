#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsdr/dataset.hpp"
#include "tsdr/linalg.hpp"

namespace tsdr {

struct SliceAssignment {
  std::vector<int> labels;  // 1..count()
  std::vector<std::size_t> counts;
  std::vector<double> proportions;
  std::vector<std::string> warnings;

  std::size_t count() const noexcept { return counts.size(); }

  static SliceAssignment from_labels(std::vector<int> labels);
};

struct Standardizer {
  Vector mu_hat;
  SymMatrix sigma_hat;
  SymMatrix sigma_inv_sqrt;
};

// Column means and 1/n covariance; ridge is added to Σ̂ before inversion only.
Standardizer fit_standardizer(const Matrix& x, double ridge = 0.0);
Standardizer fit_standardizer(const DataSet& data, double ridge = 0.0);

// Ẑ = (X − μ̂) Σ̂^{-1/2}, row-wise.
Matrix standardize(const Matrix& x, const Standardizer& s);

// Equal-count slices over the sorted response. Equal values always share a
// slice; a response with at most h distinct values gets one slice per value.
SliceAssignment slice_response(std::span<const double> y, int h);

// Σ f̂_i m̂_i m̂_iᵀ over slice means of standardized covariates.
SymMatrix sir_kernel(const Matrix& z, const SliceAssignment& slices);

// [m̂₁ − m̂₀ | Σ̂₁ − Σ̂₀] on standardized covariates, returned as KKᵀ.
// labels must be 0/1 with at least two members in each group.
SymMatrix save_kernel_binary(const Matrix& z, std::span<const int> labels);

// Σ̂^{-1/2}·Eig(K_Z; d): the estimate mapped back to the covariate scale.
Matrix kernel_in_x_scale(const SymMatrix& k_z, const Standardizer& s, std::size_t d);

}  // namespace tsdr
