#include "tsdr/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsdr/error.hpp"
#include "tsdr/internal/slicing.hpp"

namespace tsdr {

SurvivalCurve::SurvivalCurve(Vector jump_times, Vector values)
    : jump_times_(std::move(jump_times)), values_(std::move(values)) {
  if (jump_times_.size() != values_.size())
    throw Error(ErrorKind::DimensionError, "survival curve times and values differ in length");
}

double SurvivalCurve::operator()(double t) const {
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 1.0;
  return values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

double SurvivalCurve::left_limit(double t) const {
  const auto it = std::lower_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 1.0;
  return values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

SurvivalCurve kaplan_meier(std::span<const double> times, std::span<const int> events) {
  const std::size_t n = times.size();
  if (n == 0) throw Error(ErrorKind::EmptyData, "Kaplan-Meier needs at least one observation");
  if (events.size() != n) throw Error(ErrorKind::DimensionError, "times and events differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0)
      throw Error(ErrorKind::InvalidMatrix, "survival times must be finite and non-negative");
    if (events[i] != 0 && events[i] != 1) throw Error(ErrorKind::InvalidMatrix, "event indicators must be 0/1");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  // Between censorings the product telescopes, so S = anchor·(at risk)/(anchor risk);
  // complete data therefore reproduces (n − k)/n exactly.
  Vector jumps;
  Vector values;
  double anchor = 1.0;
  std::size_t anchor_risk = n;
  std::size_t at_risk = n;
  for (std::size_t k = 0; k < n;) {
    const double t = times[order[k]];
    std::size_t deaths = 0;
    std::size_t censored = 0;
    for (; k < n && times[order[k]] == t; ++k) (events[order[k]] == 1 ? deaths : censored)++;
    at_risk -= deaths;
    const double s = anchor * static_cast<double>(at_risk) / static_cast<double>(anchor_risk);
    if (deaths > 0) {
      jumps.push_back(t);
      values.push_back(s);
    }
    if (censored > 0) {
      at_risk -= censored;
      anchor = s;
      anchor_risk = at_risk;
    }
    if (anchor_risk == 0) break;
  }
  return SurvivalCurve(std::move(jumps), std::move(values));
}

SliceAssignment double_slice(std::span<const double> y_star, std::span<const int> delta, int h0, int h1) {
  if (y_star.empty()) throw Error(ErrorKind::EmptyData, "cannot slice an empty response");
  if (delta.size() != y_star.size()) throw Error(ErrorKind::DimensionError, "status length mismatch");
  if (h0 < 1 || h1 < 1) throw Error(ErrorKind::DimensionError, "h0 and h1 must be at least 1");

  std::vector<int> labels(y_star.size(), 0);
  std::vector<std::string> warnings;
  int offset = 0;
  for (int stratum : {0, 1}) {
    std::vector<std::size_t> members;
    Vector values;
    for (std::size_t i = 0; i < y_star.size(); ++i) {
      if (delta[i] != stratum) continue;
      members.push_back(i);
      values.push_back(y_star[i]);
    }
    if (members.empty()) {
      warnings.push_back(std::string(stratum == 0 ? "censored" : "event") +
                         " stratum is empty; slicing the other stratum only");
      continue;
    }
    const std::vector<int> local = internal::slice_labels(values, stratum == 0 ? h0 : h1);
    int top = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      labels[members[k]] = offset + local[k];
      top = std::max(top, local[k]);
    }
    offset += top;
  }
  SliceAssignment out = SliceAssignment::from_labels(std::move(labels));
  out.warnings = std::move(warnings);
  return out;
}

SymMatrix censored_sir_kernel(const DataSet& data, const Standardizer& std, int h0, int h1) {
  if (!data.status) throw Error(ErrorKind::MissingStatus, "double slicing needs a censoring status");
  const Matrix z = standardize(data.x, std);
  return sir_kernel(z, double_slice(data.y, *data.status, h0, h1));
}

CensoredMoments censored_save_moments(const DataSet& data, double t, const CensoredMomentOptions& opts) {
  if (!data.status) throw Error(ErrorKind::MissingStatus, "censored moments need a censoring status");
  data.validate();
  const std::vector<int>& delta = *data.status;
  const std::size_t n = data.n();
  const std::size_t p = data.p();

  const SurvivalCurve s_y = kaplan_meier(data.y, delta);
  std::vector<int> flipped(n);
  for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - delta[i];
  const SurvivalCurve s_c = kaplan_meier(data.y, flipped);

  const double s_t = s_y(t);
  const double failed = 1.0 - s_t;
  if (!(failed > 0.0))
    throw Error(ErrorKind::ThresholdTooEarly, "no events at or before t = " + std::to_string(t));

  Vector mu0(p, 0.0);
  Matrix second0(p, p);
  std::size_t at_risk = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(data.y[i] > t)) continue;
    ++at_risk;
    auto r = data.x.row(i);
    for (std::size_t a = 0; a < p; ++a) {
      mu0[a] += r[a];
      for (std::size_t b = 0; b < p; ++b) second0(a, b) += r[a] * r[b];
    }
  }
  if (at_risk == 0)
    throw Error(ErrorKind::ThresholdTooLate, "no observation exceeds t = " + std::to_string(t));
  for (double& m : mu0) m /= static_cast<double>(at_risk);
  const double denom0 = opts.group0 == Group0Normalization::RiskSetCount
                            ? static_cast<double>(at_risk)
                            : static_cast<double>(n) * s_t;
  if (!(denom0 > 0.0))
    throw Error(ErrorKind::ThresholdTooLate, "estimated survival at t is zero");
  second0 *= 1.0 / denom0;
  second0 -= Matrix::outer(mu0, mu0);

  Vector mu1(p, 0.0);
  Matrix second1(p, p);
  const double scale = static_cast<double>(n) * failed;
  for (std::size_t i = 0; i < n; ++i) {
    if (delta[i] != 1 || !(data.y[i] <= t)) continue;
    const double sc = opts.weight_at == CensoringWeightAt::RightContinuous ? s_c(data.y[i])
                                                                            : s_c.left_limit(data.y[i]);
    if (sc < opts.min_censoring_survival)
      throw CensoringSupportError(i, "censoring survival at observation " + std::to_string(i) +
                                         " is " + std::to_string(sc) + ", below the weight guard");
    const double w = 1.0 / (scale * sc);
    auto r = data.x.row(i);
    for (std::size_t a = 0; a < p; ++a) {
      mu1[a] += w * r[a];
      for (std::size_t b = 0; b < p; ++b) second1(a, b) += w * r[a] * r[b];
    }
  }
  second1 -= Matrix::outer(mu1, mu1);

  return CensoredMoments{t, std::move(mu0), std::move(mu1), SymMatrix(second0), SymMatrix(second1), s_t};
}

SymMatrix censored_save_kernel(const CensoredMoments& m, const Standardizer& std) {
  const Matrix& s = std.sigma_inv_sqrt.matrix();
  const std::size_t p = m.mu_t0.size();
  Vector diff(p);
  for (std::size_t a = 0; a < p; ++a) diff[a] = m.mu_t1[a] - m.mu_t0[a];
  const Vector v = s * diff;
  const Matrix d = s * (m.sigma_t1.matrix() - m.sigma_t0.matrix()) * s;
  Matrix block(p, p + 1);
  for (std::size_t a = 0; a < p; ++a) {
    block(a, 0) = v[a];
    for (std::size_t b = 0; b < p; ++b) block(a, b + 1) = d(a, b);
  }
  return gram(block);
}

SymMatrix censored_save_kernel(const DataSet& data, const Standardizer& std, double t,
                               const CensoredMomentOptions& opts) {
  return censored_save_kernel(censored_save_moments(data, t, opts), std);
}

SymMatrix censored_sir_binary_kernel(const DataSet& data, const Standardizer& std, double t,
                                     const CensoredMomentOptions& opts) {
  const CensoredMoments m = censored_save_moments(data, t, opts);
  Vector diff(m.mu_t0.size());
  for (std::size_t a = 0; a < diff.size(); ++a) diff[a] = m.mu_t1[a] - m.mu_t0[a];
  return gram(Matrix::column(std.sigma_inv_sqrt.matrix() * diff));
}

}  // namespace tsdr
