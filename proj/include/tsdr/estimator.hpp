#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tsdr/dataset.hpp"
#include "tsdr/kernels.hpp"
#include "tsdr/linalg.hpp"
#include "tsdr/survival.hpp"

namespace tsdr {

// Known transformation g of the response. Threshold maps y to I(y <= t).
class InducedResponse {
 public:
  enum class Kind { Identity, Threshold, Custom };

  static InducedResponse identity() { return InducedResponse(Kind::Identity, 0.0, {}, "identity"); }
  static InducedResponse threshold(double t);
  static InducedResponse custom(std::string name, std::function<double(double)> fn);

  Kind kind() const noexcept { return kind_; }
  double threshold_value() const noexcept { return t_; }
  const std::string& name() const noexcept { return name_; }
  Vector apply(std::span<const double> y) const;

 private:
  InducedResponse(Kind kind, double t, std::function<double(double)> fn, std::string name)
      : kind_(kind), t_(t), fn_(std::move(fn)), name_(std::move(name)) {}

  Kind kind_;
  double t_;
  std::function<double(double)> fn_;
  std::string name_;
};

enum class KernelKind {
  Sir,
  SirBinary,
  SaveBinary,
  SirDoubleSlice,
  SirBinaryCensored,
  SaveBinaryCensored,
};

struct SdrMethod {
  KernelKind kind = KernelKind::Sir;
  InducedResponse g = InducedResponse::identity();
  int h = 10;
  int h0 = 5;
  int h1 = 10;
  CensoredMomentOptions censoring{};

  static SdrMethod sir(int h, InducedResponse g = InducedResponse::identity());
  static SdrMethod sir_binary(InducedResponse g);
  static SdrMethod save_binary(InducedResponse g);
  static SdrMethod sir_double_slice(int h0, int h1);
  static SdrMethod sir_binary_censored(double t);
  static SdrMethod save_binary_censored(double t);

  bool needs_status() const noexcept;
  std::string name() const;
};

struct KernelEstimate {
  SymMatrix kernel;
  std::vector<std::size_t> slice_counts;
  std::vector<std::string> warnings;
};

// Builds the Z-scale kernel of `method` on `data` standardized by `std`.
KernelEstimate estimate_kernel(const DataSet& data, const Standardizer& std, const Matrix& z,
                               const SdrMethod& method);

struct Diagnostics {
  std::vector<std::size_t> stage1_slice_counts;
  std::vector<std::size_t> stage2_slice_counts;
  Vector stage1_eigenvalues;     // K̂ (two-stage only)
  Vector kernel_eigenvalues;     // K̂_g
  Vector projected_eigenvalues;  // P̂_B K̂_g P̂_B (two-stage only)
  double captured_fraction = 1.0;  // tr(P̂_B K̂_g P̂_B) / tr(K̂_g)
  bool degenerate_projection = false;
  bool tie_at_cut = false;
  std::vector<std::string> warnings;
};

struct FitResult {
  Matrix gamma_hat;  // covariate scale, p × d_g
  Subspace b_hat;    // standardized scale
  Vector eigenvalues;  // of the kernel the basis was extracted from
  std::size_t d = 0;   // stage-1 dimension (0 for direct fits)
  std::size_t d_g = 0;
  Standardizer standardizer;
  Diagnostics diagnostics;
};

struct FitOptions {
  double ridge = 0.0;
};

// Γ̃_g = Σ̂^{-1/2} Eig(K̂_g; d_g).
FitResult fit_direct(const DataSet& data, const SdrMethod& method, std::size_t d_g, const FitOptions& opts = {});

// Step 1: B̂ = Eig(K̂; d). Step 2: K̂_g. Step 3: B̂_g = Eig(P̂_B K̂_g P̂_B; d_g).
FitResult fit_two_stage(const DataSet& data, const SdrMethod& stage1, const SdrMethod& stage2, std::size_t d,
                        std::size_t d_g, const FitOptions& opts = {});

// Step 3 alone, for a stage-1 subspace obtained elsewhere.
FitResult extract_projected(const SymMatrix& k_g, const Subspace& stage1, std::size_t d_g, const Standardizer& std);

inline constexpr double kMercEigenFloor = 1e-12;

struct MercChoice {
  std::size_t dim = 1;
  Vector ratios;
  std::vector<std::string> warnings;
};

// argmax over i in 1..d_star of λ_i/λ_{i+1}; the smallest index wins ties.
MercChoice merc_select(std::span<const double> eigenvalues, std::size_t d_star);
// Same over 1..d_hat−1 on the projected kernel's eigenvalues; d_hat < 2 gives 1 with a warning.
MercChoice merc_select_induced(std::span<const double> projected_eigenvalues, std::size_t d_hat);

struct MercFit {
  FitResult fit;
  MercChoice stage1;
  MercChoice induced;
};

// Two-stage fit with (d, d_g) chosen by MERC.
MercFit fit_two_stage_merc(const DataSet& data, const SdrMethod& stage1, const SdrMethod& stage2,
                           std::size_t d_star, const FitOptions& opts = {});
// Direct fit with d_g chosen by MERC on K̂_g.
MercFit fit_direct_merc(const DataSet& data, const SdrMethod& method, std::size_t d_star,
                        const FitOptions& opts = {});

}  // namespace tsdr
