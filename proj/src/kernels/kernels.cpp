#include "tsdr/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tsdr/error.hpp"
#include "tsdr/internal/slicing.hpp"

namespace tsdr {

SliceAssignment SliceAssignment::from_labels(std::vector<int> labels) {
  SliceAssignment out;
  int top = 0;
  for (int l : labels) {
    if (l < 1) throw Error(ErrorKind::DimensionError, "slice labels start at 1");
    top = std::max(top, l);
  }
  out.counts.assign(static_cast<std::size_t>(top), 0);
  for (int l : labels) ++out.counts[static_cast<std::size_t>(l - 1)];
  for (std::size_t c : out.counts)
    if (c == 0) throw Error(ErrorKind::DimensionError, "slice labels leave an empty slice");
  const double n = static_cast<double>(labels.size());
  out.proportions.reserve(out.counts.size());
  for (std::size_t c : out.counts) out.proportions.push_back(static_cast<double>(c) / n);
  out.labels = std::move(labels);
  return out;
}

namespace internal {

std::vector<int> slice_labels(std::span<const double> y, int h) {
  const std::size_t n = y.size();
  std::vector<int> labels(n, 0);
  if (n == 0) return labels;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  std::size_t distinct = 1;
  for (std::size_t k = 1; k < n; ++k)
    if (y[order[k]] != y[order[k - 1]]) ++distinct;

  const auto slices = static_cast<std::size_t>(h);
  if (distinct <= slices) {
    int label = 1;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && y[order[k]] != y[order[k - 1]]) ++label;
      labels[order[k]] = label;
    }
    return labels;
  }

  std::size_t pos = 0;
  int label = 0;
  for (std::size_t k = 0; k < slices && pos < n; ++k) {
    std::size_t end = (k + 1 == slices) ? n : std::max(pos + 1, (k + 1) * n / slices);
    while (end < n && y[order[end]] == y[order[end - 1]]) ++end;
    ++label;
    for (std::size_t j = pos; j < end; ++j) labels[order[j]] = label;
    pos = end;
  }
  return labels;
}

}  // namespace internal

SliceAssignment slice_response(std::span<const double> y, int h) {
  if (y.empty()) throw Error(ErrorKind::EmptyData, "cannot slice an empty response");
  if (h < 2) throw Error(ErrorKind::DimensionError, "slice count h must be at least 2");
  return SliceAssignment::from_labels(internal::slice_labels(y, h));
}

Standardizer fit_standardizer(const Matrix& x, double ridge) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n == 0) throw Error(ErrorKind::EmptyData, "cannot standardize an empty matrix");
  Vector mu(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) mu[j] += x(i, j);
  for (double& m : mu) m /= static_cast<double>(n);

  Matrix cov(p, p);
  Vector centered(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) centered[j] = x(i, j) - mu[j];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) cov(a, b) += centered[a] * centered[b];
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) cov(b, a) = cov(a, b) /= static_cast<double>(n);

  Standardizer s{std::move(mu), SymMatrix(cov), {}};
  s.sigma_inv_sqrt = inv_sqrt(s.sigma_hat, ridge);
  return s;
}

Standardizer fit_standardizer(const DataSet& data, double ridge) {
  data.validate();
  return fit_standardizer(data.x, ridge);
}

Matrix standardize(const Matrix& x, const Standardizer& s) {
  if (x.cols() != s.mu_hat.size()) throw Error(ErrorKind::DimensionError, "standardizer width mismatch");
  Matrix centered = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = centered.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= s.mu_hat[j];
  }
  return centered * s.sigma_inv_sqrt.matrix();
}

SymMatrix sir_kernel(const Matrix& z, const SliceAssignment& slices) {
  if (slices.labels.size() != z.rows())
    throw Error(ErrorKind::DimensionError, "slice labels do not match row count");
  const std::size_t p = z.cols();
  Matrix sums(slices.count(), p);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto dst = sums.row(static_cast<std::size_t>(slices.labels[i] - 1));
    auto src = z.row(i);
    for (std::size_t j = 0; j < p; ++j) dst[j] += src[j];
  }
  Matrix k(p, p);
  for (std::size_t s = 0; s < slices.count(); ++s) {
    auto m = sums.row(s);
    const double inv = 1.0 / static_cast<double>(slices.counts[s]);
    for (double& v : m) v *= inv;
    const double f = slices.proportions[s];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) k(a, b) += f * m[a] * m[b];
  }
  return SymMatrix(k);
}

namespace {

struct GroupMoments {
  std::size_t count = 0;
  Vector mean;
  Matrix cov;
};

GroupMoments group_moments(const Matrix& z, std::span<const int> labels, int group) {
  const std::size_t p = z.cols();
  GroupMoments g{0, Vector(p, 0.0), Matrix(p, p)};
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (labels[i] != group) continue;
    ++g.count;
    auto r = z.row(i);
    for (std::size_t j = 0; j < p; ++j) g.mean[j] += r[j];
  }
  if (g.count < 2)
    throw Error(ErrorKind::GroupTooSmall, "group " + std::to_string(group) + " has " +
                                              std::to_string(g.count) + " members; SAVE needs at least 2");
  const double inv = 1.0 / static_cast<double>(g.count);
  for (double& m : g.mean) m *= inv;
  Vector c(p);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (labels[i] != group) continue;
    auto r = z.row(i);
    for (std::size_t j = 0; j < p; ++j) c[j] = r[j] - g.mean[j];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) g.cov(a, b) += c[a] * c[b];
  }
  g.cov *= inv;
  return g;
}

}  // namespace

SymMatrix save_kernel_binary(const Matrix& z, std::span<const int> labels) {
  if (labels.size() != z.rows()) throw Error(ErrorKind::DimensionError, "labels do not match row count");
  for (int l : labels)
    if (l != 0 && l != 1) throw Error(ErrorKind::DimensionError, "SAVE labels must be binary 0/1");
  const GroupMoments g0 = group_moments(z, labels, 0);
  const GroupMoments g1 = group_moments(z, labels, 1);
  const std::size_t p = z.cols();
  Matrix block(p, p + 1);
  for (std::size_t a = 0; a < p; ++a) {
    block(a, 0) = g1.mean[a] - g0.mean[a];
    for (std::size_t b = 0; b < p; ++b) block(a, b + 1) = g1.cov(a, b) - g0.cov(a, b);
  }
  return gram(block);
}

Matrix kernel_in_x_scale(const SymMatrix& k_z, const Standardizer& s, std::size_t d) {
  const Subspace b = leading_subspace(k_z, d);
  return s.sigma_inv_sqrt.matrix() * b.basis();
}

}  // namespace tsdr
