#pragma once

#include <span>
#include <vector>

#include "tsdr/dataset.hpp"
#include "tsdr/kernels.hpp"
#include "tsdr/linalg.hpp"

namespace tsdr {

// Right-continuous step function; S(t) = 1 before the first jump.
class SurvivalCurve {
 public:
  SurvivalCurve() = default;
  SurvivalCurve(Vector jump_times, Vector values);

  const Vector& jump_times() const noexcept { return jump_times_; }
  const Vector& values() const noexcept { return values_; }

  double operator()(double t) const;
  // S(t−): value just before t.
  double left_limit(double t) const;

 private:
  Vector jump_times_;
  Vector values_;
};

// Product-limit estimator. At tied times events are removed from the risk
// set before censorings. The censoring curve Ŝ_C is kaplan_meier(times, 1 − events).
SurvivalCurve kaplan_meier(std::span<const double> times, std::span<const int> events);

// slice_response within the censored stratum (h0 slices) and the event
// stratum (h1 slices); censored slices are numbered first. An empty stratum
// is skipped and noted in warnings.
SliceAssignment double_slice(std::span<const double> y_star, std::span<const int> delta, int h0, int h1);

SymMatrix censored_sir_kernel(const DataSet& data, const Standardizer& std, int h0, int h1);

// Where Ŝ_C is read for an event at Y*: the right-continuous value (default)
// or the left limit.
enum class CensoringWeightAt { RightContinuous, LeftLimit };

// Normalization of the second moment over {Y* > t}: the risk-set count
// Σ I(Y* > t) (default), or n·Ŝ_Y(t).
enum class Group0Normalization { RiskSetCount, KaplanMeier };

struct CensoredMomentOptions {
  CensoringWeightAt weight_at = CensoringWeightAt::RightContinuous;
  Group0Normalization group0 = Group0Normalization::RiskSetCount;
  double min_censoring_survival = 1e-6;
};

// Covariate-scale moments given Y > t (group 0) and Y <= t (group 1)
// estimated from right-censored data.
struct CensoredMoments {
  double t = 0.0;
  Vector mu_t0;
  Vector mu_t1;
  SymMatrix sigma_t0;
  SymMatrix sigma_t1;
  double survival_at_t = 1.0;  // Ŝ_Y(t)
};

CensoredMoments censored_save_moments(const DataSet& data, double t, const CensoredMomentOptions& opts = {});

// KKᵀ of [Σ̂^{-1/2}(μ̂*₁ − μ̂*₀), Σ̂^{-1/2}(Σ̂*₁ − Σ̂*₀)Σ̂^{-1/2}].
SymMatrix censored_save_kernel(const DataSet& data, const Standardizer& std, double t,
                               const CensoredMomentOptions& opts = {});
SymMatrix censored_save_kernel(const CensoredMoments& moments, const Standardizer& std);

// vvᵀ with v = Σ̂^{-1/2}(μ̂*₁ − μ̂*₀).
SymMatrix censored_sir_binary_kernel(const DataSet& data, const Standardizer& std, double t,
                                     const CensoredMomentOptions& opts = {});

}  // namespace tsdr
