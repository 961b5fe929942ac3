#include "tsdr/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsdr/error.hpp"

namespace tsdr {
namespace {

Matrix equicorrelation(std::size_t p) {
  Matrix s(p, p, 0.2);
  for (std::size_t i = 0; i < p; ++i) s(i, i) = 1.0;
  return s;
}

Vector padded(std::initializer_list<double> head, std::size_t p) {
  Vector v(p, 0.0);
  std::size_t k = 0;
  for (double x : head) v[k++] = x;
  return v;
}

void require_len(const Vector& v, std::size_t p, const char* what) {
  if (v.size() != p)
    throw Error(ErrorKind::ModelMisconfigured, std::string(what) + " must have length " + std::to_string(p));
}

void require_sigma(const Matrix& sigma, std::size_t p) {
  if (sigma.rows() != p || sigma.cols() != p)
    throw Error(ErrorKind::ModelMisconfigured, "covariance must be " + std::to_string(p) + " x " + std::to_string(p));
  const EigenPairs eig = sym_eigen(SymMatrix(sigma));
  if (!(eig.values.back() > 0.0)) throw Error(ErrorKind::ModelMisconfigured, "covariance must be positive definite");
}

// Everything a per-row sampler needs, computed once per batch.
struct Prepared {
  const ModelSpec* spec = nullptr;
  Matrix root;  // Σ^{1/2}
  std::size_t p = 0;
};

Prepared prepare(const ModelSpec& spec) {
  spec.validate();
  Prepared out;
  out.spec = &spec;
  out.p = spec.p();
  std::visit([&](const auto& law) { out.root = sqrt_psd(SymMatrix(law.sigma)).matrix(); }, spec.law);
  return out;
}

void gaussian_row(const Prepared& prep, const Vector& mu, Rng& rng, Vector& scratch, std::span<double> x) {
  for (double& v : scratch) v = rng.normal();
  for (std::size_t a = 0; a < prep.p; ++a) x[a] = mu[a] + dot(prep.root.row(a), scratch);
}

void elliptical_row(const Matrix& root, const Vector& mu, double radius, Rng& rng, Vector& scratch,
                    std::span<double> x) {
  double norm2 = 0.0;
  for (double& v : scratch) {
    v = rng.normal();
    norm2 += v * v;
  }
  const double scale = radius / std::sqrt(norm2);
  for (std::size_t a = 0; a < mu.size(); ++a) x[a] = mu[a] + scale * dot(root.row(a), scratch);
}

struct RowDraw {
  double y = 0.0;
  std::size_t rejections = 0;
};

RowDraw draw_gamma(const Prepared& prep, const GammaModel& m, Rng& rng, Vector& scratch, std::span<double> x) {
  gaussian_row(prep, m.mu, rng, scratch, x);
  const double shape = 2.0 * std::exp(dot(m.alpha, x));
  return {rng.gamma(shape, m.scale), 0};
}

RowDraw draw_lognormal(const Prepared& prep, const LognormalRatioModel& m, Rng& rng, Vector& scratch,
                       std::span<double> x) {
  RowDraw out;
  while (true) {
    elliptical_row(prep.root, m.mu, rng.beta(m.radius_a, m.radius_b), rng, scratch, x);
    const double s = dot(m.alpha2, x);
    if (s > 0.0) {
      const double mean = -dot(m.alpha1, x) / s;
      const double sd = m.noise == NoiseScale::StdDev ? 1.0 / (s * s) : 1.0 / s;
      out.y = std::exp(mean + sd * rng.normal());
      return out;
    }
    if (++out.rejections > 1000)
      throw Error(ErrorKind::ModelMisconfigured, "alpha2'X <= 0 in over 1000 consecutive draws");
  }
}

RowDraw draw_piecewise(const Prepared& prep, const PiecewiseHazardModel& m, Rng& rng, Vector& scratch,
                       std::span<double> x) {
  gaussian_row(prep, m.mu, rng, scratch, x);
  const double r1 = std::exp(dot(m.alpha1, x));
  const double r2 = std::exp(dot(m.alpha2, x));
  const double r3 = std::exp(dot(m.alpha3, x));
  const double e = rng.exponential();
  const double h1 = r1 * m.tau1;
  if (e < h1) return {e / r1, 0};
  const double h2 = h1 + r2 * (m.tau2 - m.tau1);
  if (e < h2) return {m.tau1 + (e - h1) / r2, 0};
  return {m.tau2 + (e - h2) / r3, 0};
}

RowDraw draw_row(const Prepared& prep, Rng& rng, Vector& scratch, std::span<double> x) {
  return std::visit(
      [&](const auto& law) -> RowDraw {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, GammaModel>) return draw_gamma(prep, law, rng, scratch, x);
        else if constexpr (std::is_same_v<T, LognormalRatioModel>) return draw_lognormal(prep, law, rng, scratch, x);
        else return draw_piecewise(prep, law, rng, scratch, x);
      },
      prep.spec->law);
}

template <typename Law>
const Law& require_law(const ModelSpec& spec, const char* what) {
  const Law* law = std::get_if<Law>(&spec.law);
  if (!law) throw Error(ErrorKind::ModelMisconfigured, std::string("spec is not a ") + what);
  return *law;
}

Simulated generate_rows(const ModelSpec& spec, std::size_t n, Rng& rng) {
  const Prepared prep = prepare(spec);
  Simulated out;
  out.data.x = Matrix(n, prep.p);
  out.data.y.resize(n);
  out.latent_y.resize(n);
  Vector scratch(prep.p);
  for (std::size_t i = 0; i < n; ++i) {
    const RowDraw d = draw_row(prep, rng, scratch, out.data.x.row(i));
    out.latent_y[i] = d.y;
    out.rejections += d.rejections;
  }
  if (2 * out.rejections > n + out.rejections)
    throw Error(ErrorKind::ModelMisconfigured, "more than half of the covariate draws were rejected");
  if (spec.censoring) {
    const double scale = spec.censoring->scale();
    std::vector<int> status(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = rng.gamma(spec.censoring->shape, scale);
      const double y = out.latent_y[i];
      status[i] = y <= c ? 1 : 0;
      out.data.y[i] = std::min(y, c);
    }
    out.data.status = std::move(status);
  } else {
    out.data.y = out.latent_y;
  }
  return out;
}

}  // namespace

double CensoringLaw::scale() const {
  switch (convention) {
    case GammaParam::ShapeScale: return param;
    case GammaParam::ShapeRate: return 1.0 / param;
    case GammaParam::ShapeMean: return param / shape;
  }
  return param;
}

std::size_t ModelSpec::p() const {
  return std::visit([](const auto& law) { return law.mu.size(); }, law);
}

void ModelSpec::validate() const {
  const std::size_t dim = p();
  if (dim == 0) throw Error(ErrorKind::ModelMisconfigured, "model needs at least one covariate");
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        require_sigma(law.sigma, dim);
        if constexpr (std::is_same_v<T, GammaModel>) {
          require_len(law.alpha, dim, "alpha");
          if (!(law.scale > 0.0)) throw Error(ErrorKind::ModelMisconfigured, "gamma scale must be positive");
        } else if constexpr (std::is_same_v<T, LognormalRatioModel>) {
          require_len(law.alpha1, dim, "alpha1");
          require_len(law.alpha2, dim, "alpha2");
          if (!(law.radius_a > 0.0 && law.radius_b > 0.0))
            throw Error(ErrorKind::ModelMisconfigured, "radius Beta parameters must be positive");
        } else {
          require_len(law.alpha1, dim, "alpha1");
          require_len(law.alpha2, dim, "alpha2");
          require_len(law.alpha3, dim, "alpha3");
          if (!(0.0 < law.tau1 && law.tau1 < law.tau2))
            throw Error(ErrorKind::ModelMisconfigured, "need 0 < tau1 < tau2");
        }
      },
      law);
  if (censoring && !(censoring->shape > 0.0 && censoring->param > 0.0))
    throw Error(ErrorKind::ModelMisconfigured, "censoring Gamma parameters must be positive");
}

ModelSpec intro_gamma_model() {
  GammaModel m;
  m.alpha = {1.0, 2.0, 0.0};
  m.mu = Vector(3, 0.0);
  m.sigma = equicorrelation(3);
  m.scale = 0.5;
  return ModelSpec{"intro-gamma", m, std::nullopt};
}

ModelSpec lognormal_ratio_model(std::size_t p, bool censored) {
  if (p < 3) throw Error(ErrorKind::ModelMisconfigured, "log-normal ratio model needs p >= 3");
  LognormalRatioModel m;
  m.alpha1 = padded({3.0, 0.9, -1.5}, p);
  m.alpha2 = padded({3.0, 4.5, 6.0}, p);
  m.mu = padded({0.0, 3.0, 0.0}, p);
  m.sigma = equicorrelation(p);
  std::optional<CensoringLaw> c;
  if (censored) c = CensoringLaw{2.0, 1.71, GammaParam::ShapeMean};
  return ModelSpec{"lognormal-ratio", m, c};
}

ModelSpec piecewise_hazard_model(std::size_t p, bool censored) {
  if (p < 3) throw Error(ErrorKind::ModelMisconfigured, "piecewise hazard model needs p >= 3");
  PiecewiseHazardModel m;
  m.alpha1 = padded({20.0}, p);
  m.alpha2 = padded({0.0, 15.0}, p);
  m.alpha3 = padded({0.0, 0.0, 10.0}, p);
  m.tau1 = std::log(2.0);
  m.tau2 = std::log(8.0);
  m.mu = Vector(p, -0.2);
  Vector d(p, 1.0);
  d[0] = 2.0;
  Matrix s = equicorrelation(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) s(i, j) *= d[i] * d[j];
  m.sigma = s;
  std::optional<CensoringLaw> c;
  if (censored) c = CensoringLaw{1.0, 8.0, GammaParam::ShapeMean};
  return ModelSpec{"piecewise-hazard", m, c};
}

Matrix gen_elliptical_x(std::size_t n, const Vector& mu, const SymMatrix& sigma, Rng& rng, double radius_a,
                        double radius_b, std::optional<double> fixed_radius) {
  if (mu.size() != sigma.dim()) throw Error(ErrorKind::DimensionError, "mu and sigma disagree in dimension");
  const Matrix root = sqrt_psd(sigma).matrix();
  Matrix x(n, mu.size());
  Vector scratch(mu.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double r = fixed_radius ? *fixed_radius : rng.beta(radius_a, radius_b);
    elliptical_row(root, mu, r, rng, scratch, x.row(i));
  }
  return x;
}

Simulated gen_model_gamma(std::size_t n, const ModelSpec& spec, Rng& rng) {
  require_law<GammaModel>(spec, "gamma model");
  return generate_rows(spec, n, rng);
}

Simulated gen_model_lognormal_ratio(std::size_t n, const ModelSpec& spec, Rng& rng) {
  require_law<LognormalRatioModel>(spec, "log-normal ratio model");
  return generate_rows(spec, n, rng);
}

Simulated gen_model_piecewise_hazard(std::size_t n, const ModelSpec& spec, Rng& rng) {
  require_law<PiecewiseHazardModel>(spec, "piecewise hazard model");
  return generate_rows(spec, n, rng);
}

Simulated generate(const ModelSpec& spec, std::size_t n, Rng& rng) { return generate_rows(spec, n, rng); }

Matrix true_basis(const ModelSpec& spec) {
  return std::visit(
      [](const auto& law) -> Matrix {
        using T = std::decay_t<decltype(law)>;
        const std::size_t p = law.mu.size();
        if constexpr (std::is_same_v<T, GammaModel>) {
          return Matrix::column(law.alpha);
        } else if constexpr (std::is_same_v<T, LognormalRatioModel>) {
          Matrix g(p, 2);
          g.set_col(0, law.alpha1);
          g.set_col(1, law.alpha2);
          return g;
        } else {
          Matrix g(p, 3);
          g.set_col(0, law.alpha1);
          g.set_col(1, law.alpha2);
          g.set_col(2, law.alpha3);
          return g;
        }
      },
      spec.law);
}

Matrix true_induced_basis(const ModelSpec& spec, double t) {
  return std::visit(
      [t](const auto& law) -> Matrix {
        using T = std::decay_t<decltype(law)>;
        const std::size_t p = law.mu.size();
        if constexpr (std::is_same_v<T, GammaModel>) {
          return Matrix::column(law.alpha);
        } else if constexpr (std::is_same_v<T, LognormalRatioModel>) {
          if (!(t > 0.0)) throw Error(ErrorKind::DimensionError, "threshold must be positive");
          Vector g(p);
          for (std::size_t i = 0; i < p; ++i) g[i] = law.alpha1[i] + std::log(t) * law.alpha2[i];
          return Matrix::column(g);
        } else {
          std::vector<const Vector*> cols{&law.alpha1};
          if (t >= law.tau1) cols.push_back(&law.alpha2);
          if (t >= law.tau2) cols.push_back(&law.alpha3);
          Matrix g(p, cols.size());
          for (std::size_t k = 0; k < cols.size(); ++k) g.set_col(k, *cols[k]);
          return g;
        }
      },
      spec.law);
}

namespace {

Vector draw_latent(const ModelSpec& spec, std::size_t draws, std::uint64_t seed) {
  const Prepared prep = prepare(spec);
  Rng rng(seed);
  Vector y(draws);
  Vector scratch(prep.p);
  Vector x(prep.p);
  for (std::size_t i = 0; i < draws; ++i) y[i] = draw_row(prep, rng, scratch, x).y;
  return y;
}

// Inverse of the empirical CDF: smallest y with F_n(y) >= a/100.
double empirical_quantile(Vector& sorted_or_not, double percent, bool sorted) {
  const std::size_t n = sorted_or_not.size();
  auto k = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n) - 1;
  if (!sorted) std::nth_element(sorted_or_not.begin(), sorted_or_not.begin() + static_cast<long>(k), sorted_or_not.end());
  return sorted_or_not[k];
}

void check_percent(double percent) {
  if (!(percent > 0.0 && percent < 100.0))
    throw Error(ErrorKind::ConfigError, "quantile percent must lie in (0, 100)");
}

}  // namespace

double response_quantile(const ModelSpec& spec, double percent, std::size_t draws, std::uint64_t seed) {
  check_percent(percent);
  if (draws == 0) throw Error(ErrorKind::EmptyData, "quantile needs at least one draw");
  Vector y = draw_latent(spec, draws, seed);
  return empirical_quantile(y, percent, false);
}

QuantileTable::QuantileTable(const ModelSpec& spec, const std::vector<double>& percents, std::size_t draws,
                             std::uint64_t seed)
    : draws_(draws), seed_(seed) {
  if (draws == 0) throw Error(ErrorKind::EmptyData, "quantile needs at least one draw");
  for (double a : percents) check_percent(a);
  Vector y = draw_latent(spec, draws, seed);
  std::sort(y.begin(), y.end());
  for (double a : percents) values_[a] = empirical_quantile(y, a, true);
}

double QuantileTable::at(double percent) const {
  const auto it = values_.find(percent);
  if (it == values_.end())
    throw Error(ErrorKind::ConfigError, "quantile " + std::to_string(percent) + "% was not precomputed");
  return it->second;
}

std::string QuantileTable::law_key(const ModelSpec& spec) {
  ModelSpec copy = spec;
  copy.censoring.reset();
  copy.name.clear();
  return nlohmann::json(copy).dump();
}

}  // namespace tsdr
