#pragma once

#include <cstddef>

#include "tsdr/matrix.hpp"

namespace tsdr {

// Square matrix that is exactly symmetric: construction stores (A + Aᵀ)/2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& a);
  explicit SymMatrix(std::size_t dim) : m_(dim, dim) {}

  static SymMatrix identity(std::size_t dim) { return SymMatrix(Matrix::identity(dim)); }

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

 private:
  Matrix m_;
};

// Orthonormal basis of a subspace of R^p.
class Subspace {
 public:
  Subspace() = default;
  // Takes `basis` as already orthonormal; throws DimensionError if it is not (1e-10).
  explicit Subspace(Matrix basis);
  // Orthonormalizes the columns of `spanning` (modified Gram-Schmidt with
  // reorthogonalization); throws DimensionError if they are rank deficient.
  static Subspace span_of(const Matrix& spanning);

  std::size_t ambient_dim() const noexcept { return basis_.rows(); }
  std::size_t dim() const noexcept { return basis_.cols(); }
  const Matrix& basis() const noexcept { return basis_; }
  Matrix projector() const;

  // Set by leading_subspace when the cut falls inside a tied eigenvalue group.
  bool tie_at_cut() const noexcept { return tie_at_cut_; }
  void set_tie_at_cut(bool tie) noexcept { tie_at_cut_ = tie; }

 private:
  Matrix basis_;
  bool tie_at_cut_ = false;
};

struct EigenPairs {
  Vector values;   // non-increasing
  Matrix vectors;  // column k pairs with values[k]
  int sweeps = 0;
};

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kInvSqrtThreshold = 1e-10;

// Cyclic Jacobi eigensolver. Eigenvalues sorted descending; ties keep the
// original column order; each vector has its largest-|entry| positive.
EigenPairs sym_eigen(const SymMatrix& a);

// Span of the `count` leading eigenvectors.
Subspace leading_subspace(const SymMatrix& a, std::size_t count);
Subspace leading_subspace(const EigenPairs& eig, std::size_t count);

// S with S·A·S = I. Eigenvalues of A + ridge·I must exceed 1e-10·max eigenvalue.
SymMatrix inv_sqrt(const SymMatrix& a, double ridge = 0.0);
// Principal square root of a positive semi-definite matrix.
SymMatrix sqrt_psd(const SymMatrix& a);
SymMatrix pseudo_inverse(const SymMatrix& a, double rank_tol = kDefaultRankTol);

// ‖P_A − P_B‖_F.
double frobenius_span_distance(const Subspace& a, const Subspace& b);

// K·Kᵀ for a possibly non-square kernel block.
SymMatrix gram(const Matrix& k);
// P·A·P for a projector P given by an orthonormal basis.
SymMatrix project(const SymMatrix& a, const Subspace& onto);

}  // namespace tsdr
