#include "tsdr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "tsdr/error.hpp"

namespace tsdr {
namespace {

// Fraction of the stage-2 kernel's trace below which the stage-1 subspace is
// considered to have missed it.
constexpr double kCapturedFloor = 0.01;

std::vector<int> binary_labels(const Vector& values) {
  std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() != 2)
    throw Error(ErrorKind::GroupTooSmall, "induced response must take exactly two values, found " +
                                              std::to_string(distinct.size()));
  const double high = *distinct.rbegin();
  std::vector<int> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) labels[i] = values[i] == high ? 1 : 0;
  return labels;
}

double require_threshold(const SdrMethod& m) {
  if (m.g.kind() != InducedResponse::Kind::Threshold)
    throw Error(ErrorKind::ConfigError, m.name() + " needs a threshold induced response I(Y <= t)");
  return m.g.threshold_value();
}

Vector descending_eigenvalues(const SymMatrix& k) { return sym_eigen(k).values; }

}  // namespace

InducedResponse InducedResponse::threshold(double t) {
  if (!std::isfinite(t)) throw Error(ErrorKind::ConfigError, "threshold must be finite");
  return InducedResponse(Kind::Threshold, t, {}, "I(y <= " + std::to_string(t) + ")");
}

InducedResponse InducedResponse::custom(std::string name, std::function<double(double)> fn) {
  if (!fn) throw Error(ErrorKind::ConfigError, "custom induced response needs a function");
  return InducedResponse(Kind::Custom, 0.0, std::move(fn), std::move(name));
}

Vector InducedResponse::apply(std::span<const double> y) const {
  Vector out(y.begin(), y.end());
  switch (kind_) {
    case Kind::Identity:
      break;
    case Kind::Threshold:
      for (double& v : out) v = v <= t_ ? 1.0 : 0.0;
      break;
    case Kind::Custom:
      for (double& v : out) v = fn_(v);
      break;
  }
  return out;
}

SdrMethod SdrMethod::sir(int h, InducedResponse g) {
  SdrMethod m;
  m.kind = KernelKind::Sir;
  m.h = h;
  m.g = std::move(g);
  return m;
}

SdrMethod SdrMethod::sir_binary(InducedResponse g) {
  SdrMethod m;
  m.kind = KernelKind::SirBinary;
  m.g = std::move(g);
  return m;
}

SdrMethod SdrMethod::save_binary(InducedResponse g) {
  SdrMethod m;
  m.kind = KernelKind::SaveBinary;
  m.g = std::move(g);
  return m;
}

SdrMethod SdrMethod::sir_double_slice(int h0, int h1) {
  SdrMethod m;
  m.kind = KernelKind::SirDoubleSlice;
  m.h0 = h0;
  m.h1 = h1;
  return m;
}

SdrMethod SdrMethod::sir_binary_censored(double t) {
  SdrMethod m;
  m.kind = KernelKind::SirBinaryCensored;
  m.g = InducedResponse::threshold(t);
  return m;
}

SdrMethod SdrMethod::save_binary_censored(double t) {
  SdrMethod m;
  m.kind = KernelKind::SaveBinaryCensored;
  m.g = InducedResponse::threshold(t);
  return m;
}

bool SdrMethod::needs_status() const noexcept {
  return kind == KernelKind::SirDoubleSlice || kind == KernelKind::SirBinaryCensored ||
         kind == KernelKind::SaveBinaryCensored;
}

std::string SdrMethod::name() const {
  switch (kind) {
    case KernelKind::Sir: return "SIR(h=" + std::to_string(h) + ")";
    case KernelKind::SirBinary: return "SIR-binary";
    case KernelKind::SaveBinary: return "SAVE-binary";
    case KernelKind::SirDoubleSlice:
      return "SIR-double-slice(h0=" + std::to_string(h0) + ",h1=" + std::to_string(h1) + ")";
    case KernelKind::SirBinaryCensored: return "SIR-binary-censored";
    case KernelKind::SaveBinaryCensored: return "SAVE-binary-censored";
  }
  return "unknown";
}

KernelEstimate estimate_kernel(const DataSet& data, const Standardizer& std, const Matrix& z,
                               const SdrMethod& method) {
  if (method.needs_status() && !data.status)
    throw Error(ErrorKind::MissingStatus, method.name() + " needs censoring status");
  KernelEstimate out;
  switch (method.kind) {
    case KernelKind::Sir: {
      const SliceAssignment slices = slice_response(method.g.apply(data.y), method.h);
      out.kernel = sir_kernel(z, slices);
      out.slice_counts = slices.counts;
      break;
    }
    case KernelKind::SirBinary: {
      std::vector<int> labels = binary_labels(method.g.apply(data.y));
      for (int& l : labels) l += 1;
      const SliceAssignment slices = SliceAssignment::from_labels(std::move(labels));
      out.kernel = sir_kernel(z, slices);
      out.slice_counts = slices.counts;
      break;
    }
    case KernelKind::SaveBinary: {
      const std::vector<int> labels = binary_labels(method.g.apply(data.y));
      out.kernel = save_kernel_binary(z, labels);
      std::size_t ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
      out.slice_counts = {labels.size() - ones, ones};
      break;
    }
    case KernelKind::SirDoubleSlice: {
      if (method.g.kind() != InducedResponse::Kind::Identity)
        throw Error(ErrorKind::ConfigError, "double slicing works on the observed response only");
      const SliceAssignment slices = double_slice(data.y, *data.status, method.h0, method.h1);
      out.kernel = sir_kernel(z, slices);
      out.slice_counts = slices.counts;
      out.warnings = slices.warnings;
      break;
    }
    case KernelKind::SirBinaryCensored:
      out.kernel = censored_sir_binary_kernel(data, std, require_threshold(method), method.censoring);
      break;
    case KernelKind::SaveBinaryCensored:
      out.kernel = censored_save_kernel(data, std, require_threshold(method), method.censoring);
      break;
  }
  return out;
}

FitResult fit_direct(const DataSet& data, const SdrMethod& method, std::size_t d_g, const FitOptions& opts) {
  data.require_estimable();
  if (d_g < 1 || d_g > data.p())
    throw Error(ErrorKind::DimensionError, "d_g must lie in 1..p");
  FitResult out;
  out.standardizer = fit_standardizer(data.x, opts.ridge);
  const Matrix z = standardize(data.x, out.standardizer);
  KernelEstimate k = estimate_kernel(data, out.standardizer, z, method);
  const EigenPairs eig = sym_eigen(k.kernel);
  out.b_hat = leading_subspace(eig, d_g);
  out.gamma_hat = out.standardizer.sigma_inv_sqrt.matrix() * out.b_hat.basis();
  out.eigenvalues = eig.values;
  out.d_g = d_g;
  out.diagnostics.kernel_eigenvalues = eig.values;
  out.diagnostics.stage2_slice_counts = std::move(k.slice_counts);
  out.diagnostics.tie_at_cut = out.b_hat.tie_at_cut();
  out.diagnostics.warnings = std::move(k.warnings);
  return out;
}

FitResult extract_projected(const SymMatrix& k_g, const Subspace& stage1, std::size_t d_g, const Standardizer& std) {
  if (d_g < 1 || d_g > stage1.dim())
    throw Error(ErrorKind::DimensionError, "d_g must lie in 1..d (d_g = " + std::to_string(d_g) +
                                               ", d = " + std::to_string(stage1.dim()) + ")");
  const SymMatrix projected = project(k_g, stage1);
  const EigenPairs eig = sym_eigen(projected);
  FitResult out;
  out.b_hat = leading_subspace(eig, d_g);
  out.gamma_hat = std.sigma_inv_sqrt.matrix() * out.b_hat.basis();
  out.eigenvalues = eig.values;
  out.d = stage1.dim();
  out.d_g = d_g;
  out.standardizer = std;
  out.diagnostics.kernel_eigenvalues = descending_eigenvalues(k_g);
  out.diagnostics.projected_eigenvalues = eig.values;
  out.diagnostics.tie_at_cut = out.b_hat.tie_at_cut();
  const double total = trace(k_g.matrix());
  out.diagnostics.captured_fraction = total > 0.0 ? trace(projected.matrix()) / total : 0.0;
  if (out.diagnostics.captured_fraction < kCapturedFloor) {
    out.diagnostics.degenerate_projection = true;
    out.diagnostics.warnings.push_back("stage-1 subspace captures " +
                                       std::to_string(out.diagnostics.captured_fraction) +
                                       " of the stage-2 kernel trace; the projected basis is degenerate");
  }
  return out;
}

namespace {

struct StageOne {
  Standardizer std;
  Matrix z;
  KernelEstimate k;
  EigenPairs eig;
};

StageOne run_stage_one(const DataSet& data, const SdrMethod& stage1, const FitOptions& opts) {
  data.require_estimable();
  StageOne s;
  s.std = fit_standardizer(data.x, opts.ridge);
  s.z = standardize(data.x, s.std);
  s.k = estimate_kernel(data, s.std, s.z, stage1);
  s.eig = sym_eigen(s.k.kernel);
  return s;
}

FitResult finish_two_stage(const DataSet& data, StageOne& s, const SdrMethod& stage2, std::size_t d,
                           std::size_t d_g) {
  const Subspace b = leading_subspace(s.eig, d);
  KernelEstimate kg = estimate_kernel(data, s.std, s.z, stage2);
  FitResult out = extract_projected(kg.kernel, b, d_g, s.std);
  out.diagnostics.stage1_eigenvalues = s.eig.values;
  out.diagnostics.stage1_slice_counts = s.k.slice_counts;
  out.diagnostics.stage2_slice_counts = std::move(kg.slice_counts);
  out.diagnostics.tie_at_cut = out.diagnostics.tie_at_cut || b.tie_at_cut();
  auto& w = out.diagnostics.warnings;
  w.insert(w.begin(), kg.warnings.begin(), kg.warnings.end());
  w.insert(w.begin(), s.k.warnings.begin(), s.k.warnings.end());
  return out;
}

}  // namespace

FitResult fit_two_stage(const DataSet& data, const SdrMethod& stage1, const SdrMethod& stage2, std::size_t d,
                        std::size_t d_g, const FitOptions& opts) {
  if (d < 1 || d > data.p()) throw Error(ErrorKind::DimensionError, "d must lie in 1..p");
  if (d_g < 1 || d_g > d) throw Error(ErrorKind::DimensionError, "d_g must lie in 1..d");
  StageOne s = run_stage_one(data, stage1, opts);
  return finish_two_stage(data, s, stage2, d, d_g);
}

MercChoice merc_select(std::span<const double> eigenvalues, std::size_t d_star) {
  if (eigenvalues.size() < 2)
    throw Error(ErrorKind::DimensionError, "eigenvalue ratio criterion needs at least two eigenvalues");
  if (d_star < 1) throw Error(ErrorKind::DimensionError, "d* must be at least 1");
  MercChoice out;
  std::size_t range = d_star;
  if (range + 1 > eigenvalues.size()) {
    range = eigenvalues.size() - 1;
    out.warnings.push_back("d* = " + std::to_string(d_star) + " exceeds the available ratios; using " +
                           std::to_string(range));
  }
  double best = -1.0;
  for (std::size_t i = 0; i < range; ++i) {
    const double num = std::max(eigenvalues[i], kMercEigenFloor);
    const double den = std::max(eigenvalues[i + 1], kMercEigenFloor);
    const double rho = num / den;
    out.ratios.push_back(rho);
    if (rho > best) {
      best = rho;
      out.dim = i + 1;
    }
  }
  return out;
}

MercChoice merc_select_induced(std::span<const double> projected_eigenvalues, std::size_t d_hat) {
  if (d_hat < 2) {
    MercChoice out;
    out.dim = 1;
    out.warnings.push_back("d_hat < 2 leaves no ratio to maximize; d_g set to 1");
    return out;
  }
  return merc_select(projected_eigenvalues, d_hat - 1);
}

MercFit fit_two_stage_merc(const DataSet& data, const SdrMethod& stage1, const SdrMethod& stage2,
                           std::size_t d_star, const FitOptions& opts) {
  StageOne s = run_stage_one(data, stage1, opts);
  MercFit out;
  out.stage1 = merc_select(s.eig.values, d_star);
  const std::size_t d = out.stage1.dim;
  // Dimension 1 stage-1 fits still need P̂_B K̂_g P̂_B for the induced choice.
  FitResult provisional = finish_two_stage(data, s, stage2, d, 1);
  out.induced = merc_select_induced(provisional.diagnostics.projected_eigenvalues, d);
  out.fit = out.induced.dim == 1 ? std::move(provisional) : finish_two_stage(data, s, stage2, d, out.induced.dim);
  auto& w = out.fit.diagnostics.warnings;
  w.insert(w.end(), out.stage1.warnings.begin(), out.stage1.warnings.end());
  w.insert(w.end(), out.induced.warnings.begin(), out.induced.warnings.end());
  return out;
}

MercFit fit_direct_merc(const DataSet& data, const SdrMethod& method, std::size_t d_star, const FitOptions& opts) {
  MercFit out;
  FitResult provisional = fit_direct(data, method, 1, opts);
  out.induced = merc_select(provisional.eigenvalues, d_star);
  out.fit = out.induced.dim == 1 ? std::move(provisional) : fit_direct(data, method, out.induced.dim, opts);
  auto& w = out.fit.diagnostics.warnings;
  w.insert(w.end(), out.induced.warnings.begin(), out.induced.warnings.end());
  return out;
}

}  // namespace tsdr
