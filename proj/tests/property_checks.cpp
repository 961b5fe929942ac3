#include "property_checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsdr/estimator.hpp"
#include "tsdr/harness.hpp"
#include "tsdr/linalg.hpp"
#include "tsdr/rng.hpp"
#include "tsdr/simgen.hpp"
#include "tsdr/survival.hpp"

namespace tsdr::checks {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = 2.0 * rng.uniform() - 1.0;
  return m;
}

SymMatrix random_symmetric(std::size_t p, Rng& rng) { return SymMatrix(random_matrix(p, p, rng)); }

SymMatrix random_spd(std::size_t p, Rng& rng) {
  const Matrix g = random_matrix(p, p, rng);
  return SymMatrix(transpose_times(g, g) + 0.1 * Matrix::identity(p));
}

Matrix vlvt(const EigenPairs& e) {
  const std::size_t p = e.values.size();
  Matrix vl = e.vectors;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < p; ++k) vl(i, k) *= e.values[k];
  return vl * e.vectors.transpose();
}

Outcome fail(Outcome o, const std::string& what) {
  o.ok = false;
  if (o.detail.empty()) o.detail = what;
  return o;
}

template <typename... Args>
std::string str(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

// Product over event times t_j ≤ t of (1 − d_j/r_j), counted directly.
double km_direct(const std::vector<double>& times, const std::vector<int>& events, double t) {
  std::vector<double> event_times;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (events[i] && times[i] <= t) event_times.push_back(times[i]);
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());
  double s = 1.0;
  for (double tj : event_times) {
    double d = 0.0, r = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      r += times[i] >= tj;
      d += times[i] == tj && events[i];
    }
    s *= 1.0 - d / r;
  }
  return s;
}

// Efron's redistribute-to-the-right: censored mass moves equally to every later observation.
double km_redistribute(const std::vector<double>& times, const std::vector<int>& events, double t) {
  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (times[a] != times[b]) return times[a] < times[b];
    return events[a] > events[b];
  });
  std::vector<double> mass(n, 1.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    if (events[i] || k + 1 == n) continue;
    const double share = mass[k] / static_cast<double>(n - k - 1);
    for (std::size_t j = k + 1; j < n; ++j) mass[j] += share;
    mass[k] = 0.0;
  }
  double dead = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (events[order[k]] && times[order[k]] <= t) dead += mass[k];
  return 1.0 - dead;
}

DataSet complete_as_censored(const DataSet& d) {
  DataSet out = d;
  out.status = std::vector<int>(d.n(), 1);
  return out;
}

double subspace_residual(const Matrix& vectors, const Subspace& onto) {
  const Matrix resid = vectors - onto.projector() * vectors;
  return max_abs(resid);
}

}  // namespace

Outcome eigen_reconstruction(std::uint64_t seed, int trials) {
  Outcome o;
  Rng rng(seed);
  for (int k = 0; k < trials; ++k) {
    const std::size_t p = 1 + k % 8;
    const SymMatrix a = random_symmetric(p, rng);
    const EigenPairs e = sym_eigen(a);
    ++o.cases;
    const double recon = frobenius_norm(a.matrix() - vlvt(e));
    if (recon > 1e-8 * (1.0 + frobenius_norm(a.matrix()))) return fail(o, str("reconstruction error ", recon, " at p=", p));
    const double orth = max_abs_diff(transpose_times(e.vectors, e.vectors), Matrix::identity(p));
    if (orth > 1e-10) return fail(o, str("VᵀV − I = ", orth, " at p=", p));
    for (std::size_t i = 1; i < p; ++i)
      if (e.values[i] > e.values[i - 1]) return fail(o, "eigenvalues not sorted");
  }
  return o;
}

Outcome inv_sqrt_identities(std::uint64_t seed, int trials) {
  Outcome o;
  Rng rng(seed);
  for (int k = 0; k < trials; ++k) {
    const std::size_t p = 1 + k % 8;
    const SymMatrix a = random_spd(p, rng);
    const Matrix s = inv_sqrt(a).matrix();
    ++o.cases;
    const double id = max_abs_diff(s * a.matrix() * s, Matrix::identity(p));
    if (id > 1e-8) return fail(o, str("S A S − I = ", id));
    const double comm = max_abs_diff(s * a.matrix(), a.matrix() * s);
    if (comm > 1e-8) return fail(o, str("[S, A] = ", comm));
  }
  return o;
}

Outcome moore_penrose(std::uint64_t seed, int trials) {
  Outcome o;
  Rng rng(seed);
  for (int k = 0; k < trials; ++k) {
    const std::size_t p = 2 + k % 7;
    const std::size_t rank = 1 + k % (p - 1);
    const Matrix g = random_matrix(p, rank, rng);
    const Matrix a = g * g.transpose();
    const Matrix ap = pseudo_inverse(SymMatrix(a)).matrix();
    ++o.cases;
    const double e1 = max_abs_diff(a * ap * a, a);
    const double e2 = max_abs_diff(ap * a * ap, ap);
    const double e3 = max_abs_diff(a * ap, (a * ap).transpose());
    const double e4 = max_abs_diff(ap * a, (ap * a).transpose());
    if (std::max({e1, e2, e3, e4}) > 1e-8)
      return fail(o, str("Moore–Penrose residuals ", e1, " ", e2, " ", e3, " ", e4, " at p=", p, " rank=", rank));
  }
  return o;
}

Outcome frobenius_axioms(std::uint64_t seed, int trials) {
  Outcome o;
  Rng rng(seed);
  for (int k = 0; k < trials; ++k) {
    const std::size_t p = 3 + k % 6;
    const std::size_t d = 1 + k % 2;
    const Subspace a = Subspace::span_of(random_matrix(p, d, rng));
    const Subspace b = Subspace::span_of(random_matrix(p, d, rng));
    const Subspace c = Subspace::span_of(random_matrix(p, d, rng));
    ++o.cases;
    const double ab = frobenius_span_distance(a, b);
    if (ab != frobenius_span_distance(b, a)) return fail(o, "distance not symmetric");
    if (frobenius_span_distance(a, a) > 1e-12) return fail(o, "d(A, A) != 0");
    if (ab < 0.0 || ab > std::sqrt(2.0 * static_cast<double>(d)) + 1e-12) return fail(o, "distance out of range");
    // Rotate a's basis by a random orthogonal d×d matrix.
    const Matrix q = Subspace::span_of(random_matrix(d, d, rng)).basis();
    const Subspace a_rot(a.basis() * q);
    if (std::abs(frobenius_span_distance(a_rot, b) - ab) > 1e-12) return fail(o, "not invariant to basis rotation");
    if (frobenius_span_distance(a, c) > ab + frobenius_span_distance(b, c) + 1e-12)
      return fail(o, "triangle inequality violated");
  }
  return o;
}

Outcome km_brute_force(std::uint64_t seed, int max_n) {
  Outcome o;
  Rng rng(seed);
  for (int n = 1; n <= max_n; ++n) {
    // Times drawn from a small grid so ties occur.
    std::vector<double> times(static_cast<std::size_t>(n));
    for (auto& t : times) t = std::floor(rng.uniform() * 6.0) + 1.0;
    std::vector<double> probes = times;
    for (double t : times) probes.push_back(t + 0.5);
    probes.push_back(0.5);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<int> events(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) events[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
      const SurvivalCurve km = kaplan_meier(times, events);
      ++o.cases;
      for (double t : probes) {
        const double got = km(t);
        const double direct = km_direct(times, events, t);
        const double efron = km_redistribute(times, events, t);
        if (std::abs(got - direct) > 1e-12 || std::abs(got - efron) > 1e-12)
          return fail(o, str("n=", n, " mask=", mask, " t=", t, ": ", got, " vs ", direct, " / ", efron));
      }
    }
  }
  return o;
}

Outcome censored_reductions(std::uint64_t seed, int trials) {
  Outcome o;
  for (int k = 0; k < trials; ++k) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k));
    const ModelSpec spec = k % 2 ? piecewise_hazard_model(6, false) : lognormal_ratio_model(6, false);
    const DataSet complete = generate(spec, 80, rng).data;
    const DataSet cens = complete_as_censored(complete);
    const Standardizer st = fit_standardizer(complete);
    const Matrix z = standardize(complete.x, st);
    Vector sorted = complete.y;
    std::sort(sorted.begin(), sorted.end());
    const double t = sorted[30 + 5 * static_cast<std::size_t>(k % 4)];
    std::vector<int> labels(complete.n());
    for (std::size_t i = 0; i < complete.n(); ++i) labels[i] = complete.y[i] <= t;
    ++o.cases;

    const double sir_diff =
        max_abs_diff(censored_sir_kernel(cens, st, 5, 10).matrix(), sir_kernel(z, slice_response(complete.y, 10)).matrix());
    if (sir_diff > 1e-12) return fail(o, str("double-sliced SIR differs by ", sir_diff));

    const double save_diff =
        max_abs_diff(censored_save_kernel(cens, st, t).matrix(), save_kernel_binary(z, labels).matrix());
    if (save_diff > 1e-8) return fail(o, str("censored SAVE differs by ", save_diff));

    // On standardized Z, Σ f_i m_i m_iᵀ = f₀f₁ (m₁ − m₀)(m₁ − m₀)ᵀ for two groups.
    const SliceAssignment two = slice_response(Vector(labels.begin(), labels.end()), 2);
    const double f0f1 = two.proportions[0] * two.proportions[1];
    const Matrix sir_bin = (1.0 / f0f1) * sir_kernel(z, two).matrix();
    const double bin_diff = max_abs_diff(censored_sir_binary_kernel(cens, st, t).matrix(), sir_bin);
    if (bin_diff > 1e-8 * (1.0 + max_abs(sir_bin))) return fail(o, str("censored binary SIR differs by ", bin_diff));

    const CensoredMoments m = censored_save_moments(cens, t);
    for (std::size_t j = 0; j < complete.p(); ++j) {
      double s0 = 0.0, s1 = 0.0;
      std::size_t n0 = 0, n1 = 0;
      for (std::size_t i = 0; i < complete.n(); ++i) {
        if (labels[i]) s1 += complete.x(i, j), ++n1;
        else s0 += complete.x(i, j), ++n0;
      }
      if (std::abs(m.mu_t0[j] - s0 / static_cast<double>(n0)) > 1e-10 ||
          std::abs(m.mu_t1[j] - s1 / static_cast<double>(n1)) > 1e-10)
        return fail(o, "censored group means differ from complete-data means");
    }
  }
  return o;
}

Outcome projection_idempotence(std::uint64_t seed, int trials) {
  Outcome o;
  for (int k = 0; k < trials; ++k) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k));
    const bool model5 = k % 2;
    const ModelSpec spec = model5 ? piecewise_hazard_model(8, false) : lognormal_ratio_model(8, false);
    const DataSet data = generate(spec, 120, rng).data;
    Vector sorted = data.y;
    std::sort(sorted.begin(), sorted.end());
    const double t = sorted[60];
    const InducedResponse g = InducedResponse::threshold(t);
    const SdrMethod stage2 = model5 ? SdrMethod::save_binary(g) : SdrMethod::sir_binary(g);
    const std::size_t d = model5 ? 3 : 2;
    const FitResult fit = fit_two_stage(data, SdrMethod::sir(10), stage2, d, d - 1);
    const Standardizer st = fit_standardizer(data);
    const Matrix z = standardize(data.x, st);
    const Subspace b = leading_subspace(estimate_kernel(data, st, z, SdrMethod::sir(10)).kernel, d);
    ++o.cases;
    const double resid = subspace_residual(fit.b_hat.basis(), b);
    if (resid > 1e-8) return fail(o, str("B̂_g leaves span(B̂) by ", resid));
    const double map = max_abs_diff(fit.gamma_hat, st.sigma_inv_sqrt.matrix() * fit.b_hat.basis());
    if (map > 1e-10) return fail(o, str("Γ̂_g != Σ̂^{-1/2} B̂_g by ", map));
  }
  return o;
}

Outcome affine_equivariance(std::uint64_t seed, int trials) {
  Outcome o;
  for (int k = 0; k < trials; ++k) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k));
    const bool censored = k % 2;
    const ModelSpec spec = lognormal_ratio_model(6, censored);
    const DataSet data = generate(spec, 150, rng).data;
    Matrix a = random_matrix(6, 6, rng);
    for (std::size_t i = 0; i < 6; ++i) a(i, i) += 3.0;
    Vector shift(6);
    for (auto& v : shift) v = 4.0 * rng.uniform() - 2.0;
    DataSet moved = data;
    moved.x = data.x * a;
    for (std::size_t i = 0; i < moved.n(); ++i)
      for (std::size_t j = 0; j < 6; ++j) moved.x(i, j) += shift[j];

    Vector sorted = data.y;
    std::sort(sorted.begin(), sorted.end());
    const double t = sorted[90];
    const SdrMethod stage1 = censored ? SdrMethod::sir_double_slice(5, 10) : SdrMethod::sir(10);
    const SdrMethod stage2 =
        censored ? SdrMethod::save_binary_censored(t) : SdrMethod::sir_binary(InducedResponse::threshold(t));
    // Xa·Γ' = X·Γ for every row requires Γ' = a⁻¹Γ, i.e. span(aΓ') = span(Γ).
    for (bool two_stage : {true, false}) {
      const FitResult f0 = two_stage ? fit_two_stage(data, stage1, stage2, 2, 1) : fit_direct(data, stage2, 1);
      const FitResult f1 = two_stage ? fit_two_stage(moved, stage1, stage2, 2, 1) : fit_direct(moved, stage2, 1);
      ++o.cases;
      const double dist =
          frobenius_span_distance(Subspace::span_of(f0.gamma_hat), Subspace::span_of(a * f1.gamma_hat));
      if (dist > 1e-6) return fail(o, str("affine map moved the span by ", dist, two_stage ? " (two-stage)" : " (direct)"));
    }
  }
  return o;
}

Outcome seed_determinism(std::uint64_t seed) {
  Outcome o;
  for (const ModelSpec& spec :
       {intro_gamma_model(), lognormal_ratio_model(10, true), piecewise_hazard_model(10, true)}) {
    Rng r1(seed), r2(seed);
    const Simulated a = generate(spec, 200, r1);
    const Simulated b = generate(spec, 200, r2);
    ++o.cases;
    if (!(a.data.x == b.data.x) || a.data.y != b.data.y || a.data.status != b.data.status)
      return fail(o, "data differ for " + spec.name);
    if (spec.censoring) {
      Vector sorted = a.data.y;
      std::sort(sorted.begin(), sorted.end());
      const SdrMethod stage2 = SdrMethod::sir_binary_censored(sorted[100]);
      const FitResult f1 = fit_two_stage(a.data, SdrMethod::sir_double_slice(5, 10), stage2, 2, 1);
      const FitResult f2 = fit_two_stage(b.data, SdrMethod::sir_double_slice(5, 10), stage2, 2, 1);
      if (!(f1.gamma_hat == f2.gamma_hat) || f1.eigenvalues != f2.eigenvalues) return fail(o, "fits differ for " + spec.name);
    }
  }
  return o;
}

Outcome parallel_matches_serial(std::uint64_t seed, int jobs) {
  Outcome o;
  std::vector<CellSpec> cells = table1_model4_cells(24, seed);
  const auto m5 = table1_model5_cells(24, seed);
  cells.push_back(m5[2]);
  cells.push_back(m5[10]);
  for (auto& c : cells) c.record_directions = true;
  for (const CellSpec& c : {cells[0], cells[2], cells[12], cells[13]}) {
    const double t = c.model.censoring ? 0.8 : (c.family == Stage2Family::Save ? 2.1 : 0.82);
    const CellReport par = run_cell(c, t, jobs);
    const CellReport ser = run_cell_serial(c, t);
    ++o.cases;
    if (par.two_stage.mean != ser.two_stage.mean || par.direct.mean != ser.direct.mean ||
        par.two_stage.se != ser.two_stage.se || par.direct.se != ser.direct.se || par.failed != ser.failed ||
        par.directions_two_stage != ser.directions_two_stage || par.directions_direct != ser.directions_direct)
      return fail(o, "parallel and serial results differ for " + c.label);
  }
  return o;
}

}  // namespace tsdr::checks
