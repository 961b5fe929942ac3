#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tsdr/error.hpp"
#include "tsdr/kernels.hpp"
#include "tsdr/simgen.hpp"

using namespace tsdr;

namespace {

double censoring_rate(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const Simulated s = generate(spec, n, rng);
  double censored = 0;
  for (int d : *s.data.status) censored += d == 0;
  return censored / static_cast<double>(n);
}

// Kolmogorov–Smirnov distance of a sample from Exp(1).
double ks_exponential(Vector v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = 1.0 - std::exp(-v[i]);
    worst = std::max({worst, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return worst;
}

ModelSpec constant_hazard(std::size_t p) {
  ModelSpec spec = piecewise_hazard_model(p, false);
  auto& m = std::get<PiecewiseHazardModel>(spec.law);
  m.alpha2 = m.alpha3 = m.alpha1;
  return spec;
}

}  // namespace

TEST_SUITE("simgen") {
  TEST_CASE("elliptical covariates: mean and covariance proportional to sigma") {
    const std::size_t n = 10000, p = 4;
    Matrix sig(p, p, 0.2);
    for (std::size_t i = 0; i < p; ++i) sig(i, i) = 1.0;
    const Vector mu{0, 3, 0, 0};
    Rng rng(61);
    const Matrix x = gen_elliptical_x(n, mu, SymMatrix(sig), rng, 1.8, 0.3);
    const Standardizer s = fit_standardizer(x);
    const double er2 = (1.8 * 2.8) / (2.1 * 3.1);
    for (std::size_t j = 0; j < p; ++j) {
      const double se = std::sqrt(er2 / p / n);
      CHECK(std::abs(s.mu_hat[j] - mu[j]) < 3 * se);
    }
    for (std::size_t i = 0; i < p; ++i) CHECK(s.sigma_hat(i, i) / (er2 / p) == doctest::Approx(1.0).epsilon(0.05));
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const double corr = s.sigma_hat(i, j) / std::sqrt(s.sigma_hat(i, i) * s.sigma_hat(j, j));
        CHECK(std::abs(corr - sig(i, j)) < 0.03);
      }
  }

  TEST_CASE("fixed radius puts every row on the ellipsoid") {
    const Matrix sig{{2, 0.5}, {0.5, 1}};
    Rng rng(62);
    const Matrix x = gen_elliptical_x(500, Vector{1, -1}, SymMatrix(sig), rng, 1.8, 0.3, 1.0);
    const Matrix w = inv_sqrt(SymMatrix(sig)).matrix();
    for (std::size_t i = 0; i < 500; ++i) {
      const Vector c{x(i, 0) - 1, x(i, 1) + 1};
      const Vector z = w * c;
      CHECK(std::sqrt(dot(z, z)) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("gamma model: conditional mean at zero index is shape times scale") {
    ModelSpec spec = intro_gamma_model();
    std::get<GammaModel>(spec.law).alpha = Vector{0, 0, 0};
    Rng rng(63);
    const Simulated s = generate(spec, 100000, rng);
    double mean = 0;
    for (double y : s.data.y) mean += y / 1e5;
    CHECK(std::abs(mean - 1.0) < 3 * std::sqrt(0.5 / 1e5));
    const Matrix z = standardize(s.data.x, fit_standardizer(s.data.x));
    CHECK(frobenius_norm(sir_kernel(z, slice_response(s.data.y, 10)).matrix()) < 0.01);
  }

  TEST_CASE("lognormal-ratio model: rare rejections and the pinned censoring law") {
    const ModelSpec spec = lognormal_ratio_model(10, true);
    Rng rng(64);
    const Simulated s = generate(spec, 10000, rng);
    CHECK(static_cast<double>(s.rejections) / 10000.0 < 0.01);
    CHECK(spec.censoring->convention == GammaParam::ShapeMean);
    CHECK(std::abs(censoring_rate(spec, 10000, 65) - 0.25) < 0.02);
  }

  TEST_CASE("piecewise-hazard model: pinned censoring law") {
    const ModelSpec spec = piecewise_hazard_model(10, true);
    CHECK(spec.censoring->convention == GammaParam::ShapeMean);
    CHECK(std::abs(censoring_rate(spec, 10000, 66) - 0.25) < 0.02);
  }

  TEST_CASE("censoring conventions: only shape-mean hits 25% for both models") {
    for (GammaParam c : {GammaParam::ShapeScale, GammaParam::ShapeRate, GammaParam::ShapeMean}) {
      ModelSpec m4 = lognormal_ratio_model(10, true), m5 = piecewise_hazard_model(10, true);
      m4.censoring->convention = m5.censoring->convention = c;
      const bool both = std::abs(censoring_rate(m4, 10000, 67) - 0.25) < 0.02 &&
                        std::abs(censoring_rate(m5, 10000, 68) - 0.25) < 0.02;
      INFO(to_string(c));
      CHECK(both == (c == GammaParam::ShapeMean));
    }
  }

  TEST_CASE("lognormal-ratio model rejects a law with alpha2 index mostly negative") {
    ModelSpec spec = lognormal_ratio_model(3, false);
    auto& m = std::get<LognormalRatioModel>(spec.law);
    m.mu = Vector{0, -3, 0};
    Rng rng(69);
    try {
      generate(spec, 200, rng);
      FAIL("expected ModelMisconfigured");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ModelMisconfigured);
    }
  }

  TEST_CASE("piecewise hazard: constant hazard gives exponential times") {
    const ModelSpec spec = constant_hazard(5);
    const auto& m = std::get<PiecewiseHazardModel>(spec.law);
    Rng rng(70);
    const Simulated s = generate(spec, 10000, rng);
    Vector e(10000);
    for (std::size_t i = 0; i < 10000; ++i) e[i] = s.data.y[i] * std::exp(dot(m.alpha1, s.data.x.row(i)));
    CHECK(ks_exponential(e) < 0.02);
  }

  TEST_CASE("piecewise hazard: first-segment probability and no atoms") {
    const ModelSpec spec = piecewise_hazard_model(5, false);
    const auto& m = std::get<PiecewiseHazardModel>(spec.law);
    Rng rng(71);
    const std::size_t n = 20000;
    const Simulated s = generate(spec, n, rng);
    // Hazards reach e^60, so an offset past τ can fall below half an ulp and
    // round onto τ itself. The count of such ties must match the continuous law.
    const double half1 = 0.5 * (std::nextafter(m.tau1, 1e9) - m.tau1);
    const double half2 = 0.5 * (std::nextafter(m.tau2, 1e9) - m.tau2);
    double diff = 0, var = 0, expected_ties = 0;
    std::size_t ties = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = s.data.x.row(i);
      const double r1 = std::exp(dot(m.alpha1, x)), r2 = std::exp(dot(m.alpha2, x)), r3 = std::exp(dot(m.alpha3, x));
      const double u = 1.0 - std::exp(-m.tau1 * r1);
      diff += (s.data.y[i] < m.tau1) - u;
      var += u * (1 - u);
      const double h2 = m.tau1 * r1 + (m.tau2 - m.tau1) * r2;
      expected_ties += (1 - u) * -std::expm1(-r2 * half1) + std::exp(-h2) * -std::expm1(-r3 * half2);
      ties += s.data.y[i] == m.tau1 || s.data.y[i] == m.tau2;
    }
    CHECK(std::abs(diff) < 3 * std::sqrt(var));
    INFO("ties " << ties << ", expected " << expected_ties);
    CHECK(std::abs(static_cast<double>(ties) - expected_ties) < 4 * std::sqrt(expected_ties) + 1);
  }

  TEST_CASE("true bases") {
    const ModelSpec m4 = lognormal_ratio_model(5, false);
    const auto& l = std::get<LognormalRatioModel>(m4.law);
    const Matrix g = true_induced_basis(m4, 2.0);
    REQUIRE(g.cols() == 1);
    for (std::size_t j = 0; j < 5; ++j) CHECK(g(j, 0) == doctest::Approx(l.alpha1[j] + std::log(2.0) * l.alpha2[j]));
    CHECK(true_basis(m4).cols() == 2);

    const ModelSpec m5 = piecewise_hazard_model(10, false);
    const auto& ph = std::get<PiecewiseHazardModel>(m5.law);
    CHECK(true_basis(m5).cols() == 3);
    CHECK(true_induced_basis(m5, 0.5 * ph.tau1).cols() == 1);
    CHECK(true_induced_basis(m5, 0.5 * (ph.tau1 + ph.tau2)).cols() == 2);
    CHECK(true_induced_basis(m5, 2 * ph.tau2).cols() == 3);
  }

  TEST_CASE("response quantiles") {
    const ModelSpec m5 = piecewise_hazard_model(10, false);
    const QuantileTable q(m5, {30, 45, 50, 70}, 200'000);
    CHECK(q.at(30) < q.at(50));
    CHECK(q.at(50) < q.at(70));
    CHECK(q.at(45) < std::log(2.0));
    CHECK_THROWS(q.at(60));

    ModelSpec sym = lognormal_ratio_model(3, false);
    std::get<LognormalRatioModel>(sym.law).alpha1 = Vector{0, 0, 0};
    CHECK(response_quantile(sym, 50.0, 200'000) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(response_quantile(sym, 50.0, 50'000, 9) == response_quantile(sym, 50.0, 50'000, 9));
  }

  TEST_CASE("law_key ignores censoring and the name") {
    ModelSpec a = lognormal_ratio_model(10, true), b = lognormal_ratio_model(10, false);
    b.name = "other";
    CHECK(QuantileTable::law_key(a) == QuantileTable::law_key(b));
    CHECK(QuantileTable::law_key(a) != QuantileTable::law_key(lognormal_ratio_model(20, false)));
  }

  TEST_CASE("seed determinism of generated data") {
    const ModelSpec spec = piecewise_hazard_model(10, true);
    Rng a(72), b(72);
    const Simulated x = generate(spec, 300, a), y = generate(spec, 300, b);
    CHECK(x.data.x == y.data.x);
    CHECK(x.data.y == y.data.y);
    CHECK(*x.data.status == *y.data.status);
  }

  TEST_CASE("model spec JSON round trip and validation") {
    for (const ModelSpec& spec :
         {intro_gamma_model(), lognormal_ratio_model(10, true), piecewise_hazard_model(20, true)}) {
      const nlohmann::json j = spec;
      const ModelSpec back = j.get<ModelSpec>();
      CHECK(nlohmann::json(back) == j);
      Rng a(73), b(73);
      CHECK(generate(spec, 50, a).data.y == generate(back, 50, b).data.y);
    }
    nlohmann::json bad = lognormal_ratio_model(5, false);
    bad["colour"] = 1;
    CHECK_THROWS_AS(bad.get<ModelSpec>(), Error);

    ModelSpec broken = piecewise_hazard_model(5, false);
    std::get<PiecewiseHazardModel>(broken.law).tau2 = 0.1;
    CHECK_THROWS_AS(broken.validate(), Error);
  }
}
