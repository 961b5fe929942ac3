#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tsdr/dataset.hpp"
#include "tsdr/linalg.hpp"
#include "tsdr/rng.hpp"

namespace tsdr {

// How the second argument of Gamma(k, θ) is read.
enum class GammaParam { ShapeScale, ShapeRate, ShapeMean };

struct CensoringLaw {
  double shape = 1.0;
  double param = 1.0;
  GammaParam convention = GammaParam::ShapeMean;

  double scale() const;
};

// How the second argument of N(m, v) in the log-normal ratio model is read.
enum class NoiseScale { StdDev, Variance };

// Y | X ~ Gamma(shape 2exp(αᵀX), scale), X ~ N(μ, Σ).
struct GammaModel {
  Vector alpha;
  Vector mu;
  Matrix sigma;
  double scale = 0.5;
};

// log Y | X ~ N(−α₁ᵀX/α₂ᵀX, (α₂ᵀX)^{-2}), X elliptical with Beta radius.
struct LognormalRatioModel {
  Vector alpha1;
  Vector alpha2;
  Vector mu;
  Matrix sigma;
  double radius_a = 1.8;
  double radius_b = 0.3;
  NoiseScale noise = NoiseScale::StdDev;
};

// Piecewise-constant hazard exp(α_kᵀX) on [0,τ₁), [τ₁,τ₂), [τ₂,∞); X ~ N(μ, Σ).
struct PiecewiseHazardModel {
  Vector alpha1;
  Vector alpha2;
  Vector alpha3;
  double tau1 = 0.0;
  double tau2 = 0.0;
  Vector mu;
  Matrix sigma;
};

using ModelLaw = std::variant<GammaModel, LognormalRatioModel, PiecewiseHazardModel>;

struct ModelSpec {
  std::string name;
  ModelLaw law;
  std::optional<CensoringLaw> censoring;

  std::size_t p() const;
  void validate() const;
};

ModelSpec intro_gamma_model();
ModelSpec lognormal_ratio_model(std::size_t p, bool censored);
ModelSpec piecewise_hazard_model(std::size_t p, bool censored);

void to_json(nlohmann::json& j, const ModelSpec& spec);
void from_json(const nlohmann::json& j, ModelSpec& spec);
std::string to_string(GammaParam c);
std::string to_string(NoiseScale c);

struct Simulated {
  DataSet data;
  Vector latent_y;  // Y before censoring
  std::size_t rejections = 0;
};

// X = μ + Σ^{1/2} r u/‖u‖ with u ~ N_p(0, I), r ~ Beta(a, b), or r fixed when given.
Matrix gen_elliptical_x(std::size_t n, const Vector& mu, const SymMatrix& sigma, Rng& rng, double radius_a,
                        double radius_b, std::optional<double> fixed_radius = std::nullopt);

Simulated gen_model_gamma(std::size_t n, const ModelSpec& spec, Rng& rng);
Simulated gen_model_lognormal_ratio(std::size_t n, const ModelSpec& spec, Rng& rng);
Simulated gen_model_piecewise_hazard(std::size_t n, const ModelSpec& spec, Rng& rng);
Simulated generate(const ModelSpec& spec, std::size_t n, Rng& rng);

// Γ: basis of the central subspace of Y | X.
Matrix true_basis(const ModelSpec& spec);
// Γ_g for Y_g = I(Y <= t); indicator-inactive columns are dropped.
Matrix true_induced_basis(const ModelSpec& spec, double t);

inline constexpr std::size_t kQuantileDraws = 1'000'000;
inline constexpr std::uint64_t kQuantileSeed = 0x5EED'0F'7A'B1E1ULL;

// Empirical a% quantile of Y from `draws` fresh uncensored draws.
double response_quantile(const ModelSpec& spec, double percent, std::size_t draws = kQuantileDraws,
                         std::uint64_t seed = kQuantileSeed);

// Quantiles of one response law computed from a single pass of draws.
class QuantileTable {
 public:
  QuantileTable() = default;
  QuantileTable(const ModelSpec& spec, const std::vector<double>& percents, std::size_t draws = kQuantileDraws,
                std::uint64_t seed = kQuantileSeed);

  double at(double percent) const;
  const std::map<double, double>& values() const noexcept { return values_; }
  std::size_t draws() const noexcept { return draws_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Key identifying the response law: the spec without its censoring law.
  static std::string law_key(const ModelSpec& spec);

 private:
  std::map<double, double> values_;
  std::size_t draws_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace tsdr
