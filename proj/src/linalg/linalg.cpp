#include "tsdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsdr/error.hpp"

namespace tsdr {
namespace {

constexpr int kMaxSweeps = 100;
constexpr double kSweepTol = 1e-12;
constexpr double kOrthoTol = 1e-10;

void require_finite(const Matrix& a, const char* what) {
  if (!all_finite(a)) throw Error(ErrorKind::InvalidMatrix, std::string(what) + " has non-finite entries");
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// One Jacobi rotation annihilating a(p,q); accumulates into v.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();

  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    const double new_kp = c * akp - s * akq;
    const double new_kq = s * akp + c * akq;
    a(k, p) = a(p, k) = new_kp;
    a(k, q) = a(q, k) = new_kq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

Matrix reconstruct(const Matrix& vectors, std::span<const double> values) {
  const std::size_t n = vectors.rows();
  Matrix out(n, n);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double lam = values[k];
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = lam * vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * vectors(j, k);
    }
  }
  return out;
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& a) : m_(a.rows(), a.cols()) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorKind::DimensionError, "symmetric matrix must be square with dim >= 1");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    m_(i, i) = a(i, i);
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      m_(i, j) = m_(j, i) = v;
    }
  }
}

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() == 0 || basis_.cols() > basis_.rows())
    throw Error(ErrorKind::DimensionError, "subspace dimension must be in 1..ambient");
  const Matrix gram = transpose_times(basis_, basis_);
  if (max_abs_diff(gram, Matrix::identity(basis_.cols())) > kOrthoTol)
    throw Error(ErrorKind::DimensionError, "subspace basis is not orthonormal");
}

Subspace Subspace::span_of(const Matrix& spanning) {
  require_finite(spanning, "spanning set");
  const std::size_t p = spanning.rows();
  const std::size_t k = spanning.cols();
  if (k == 0 || k > p) throw Error(ErrorKind::DimensionError, "spanning set has too many columns");
  Matrix q(p, k);
  for (std::size_t j = 0; j < k; ++j) {
    Vector v = spanning.col(j);
    const double original = std::sqrt(dot(v, v));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        double proj = 0.0;
        for (std::size_t r = 0; r < p; ++r) proj += q(r, i) * v[r];
        for (std::size_t r = 0; r < p; ++r) v[r] -= proj * q(r, i);
      }
    }
    const double norm = std::sqrt(dot(v, v));
    if (original == 0.0 || norm <= 1e-12 * original)
      throw Error(ErrorKind::DimensionError, "spanning set is rank deficient");
    for (std::size_t r = 0; r < p; ++r) q(r, j) = v[r] / norm;
  }
  return Subspace(std::move(q));
}

Matrix Subspace::projector() const {
  Matrix bt = basis_.transpose();
  return basis_ * bt;
}

EigenPairs sym_eigen(const SymMatrix& sym) {
  const Matrix& input = sym.matrix();
  require_finite(input, "matrix");
  const std::size_t n = sym.dim();
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  const double tol = kSweepTol * frobenius_norm(input);
  int sweeps = 0;
  while (sweeps < kMaxSweeps && off_diagonal_norm(a) > tol) {
    ++sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (a(p, q) != 0.0) rotate(a, v, p, q);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenPairs out;
  out.sweeps = sweeps;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v(i, src)) > std::abs(v(arg, src))) arg = i;
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

Subspace leading_subspace(const EigenPairs& eig, std::size_t count) {
  const std::size_t n = eig.values.size();
  if (count < 1 || count > n)
    throw Error(ErrorKind::DimensionError,
                "requested " + std::to_string(count) + " leading eigenvectors of a " +
                    std::to_string(n) + "-dimensional matrix");
  Subspace s(eig.vectors.left_cols(count));
  if (count < n) {
    const double scale = std::max(1.0, std::abs(eig.values.front()));
    s.set_tie_at_cut(std::abs(eig.values[count - 1] - eig.values[count]) <= 1e-10 * scale);
  }
  return s;
}

Subspace leading_subspace(const SymMatrix& a, std::size_t count) {
  if (count < 1 || count > a.dim())
    throw Error(ErrorKind::DimensionError,
                "requested " + std::to_string(count) + " leading eigenvectors of a " +
                    std::to_string(a.dim()) + "-dimensional matrix");
  return leading_subspace(sym_eigen(a), count);
}

SymMatrix inv_sqrt(const SymMatrix& a, double ridge) {
  Matrix shifted = a.matrix();
  if (ridge != 0.0)
    for (std::size_t i = 0; i < a.dim(); ++i) shifted(i, i) += ridge;
  const EigenPairs eig = sym_eigen(SymMatrix(shifted));
  const double largest = eig.values.front();
  const double smallest = eig.values.back();
  if (!(largest > 0.0) || smallest <= kInvSqrtThreshold * largest)
    throw NotPositiveDefiniteError(
        smallest, "smallest eigenvalue " + std::to_string(smallest) +
                      " is at or below the positive-definiteness threshold; consider a ridge");
  Vector inv(eig.values.size());
  for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = 1.0 / std::sqrt(eig.values[k]);
  return SymMatrix(reconstruct(eig.vectors, inv));
}

SymMatrix sqrt_psd(const SymMatrix& a) {
  const EigenPairs eig = sym_eigen(a);
  const double tol = 1e-12 * std::max(1.0, std::abs(eig.values.front()));
  Vector root(eig.values.size());
  for (std::size_t k = 0; k < root.size(); ++k) {
    if (eig.values[k] < -tol)
      throw NotPositiveDefiniteError(eig.values[k], "matrix square root needs a PSD argument");
    root[k] = std::sqrt(std::max(0.0, eig.values[k]));
  }
  return SymMatrix(reconstruct(eig.vectors, root));
}

SymMatrix pseudo_inverse(const SymMatrix& a, double rank_tol) {
  const EigenPairs eig = sym_eigen(a);
  double largest = 0.0;
  for (double x : eig.values) largest = std::max(largest, std::abs(x));
  Vector inv(eig.values.size(), 0.0);
  if (largest > 0.0)
    for (std::size_t k = 0; k < inv.size(); ++k)
      if (std::abs(eig.values[k]) > rank_tol * largest) inv[k] = 1.0 / eig.values[k];
  return SymMatrix(reconstruct(eig.vectors, inv));
}

double frobenius_span_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw Error(ErrorKind::DimensionError, "subspaces live in different ambient dimensions");
  const Matrix diff = a.projector() - b.projector();
  return frobenius_norm(diff);
}

SymMatrix gram(const Matrix& k) {
  Matrix out(k.rows(), k.rows());
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = i; j < k.rows(); ++j) out(i, j) = out(j, i) = dot(k.row(i), k.row(j));
  return SymMatrix(out);
}

SymMatrix project(const SymMatrix& a, const Subspace& onto) {
  if (a.dim() != onto.ambient_dim())
    throw Error(ErrorKind::DimensionError, "projection dimension mismatch");
  const Matrix p = onto.projector();
  return SymMatrix(p * a.matrix() * p);
}

}  // namespace tsdr
