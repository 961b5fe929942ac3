#include "tsdr/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "tsdr/error.hpp"

namespace tsdr {
namespace {

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Vector aligned_direction(const Matrix& gamma_hat, const Vector& truth) {
  Vector g = gamma_hat.col(0);
  const double norm = std::sqrt(dot(g, g));
  const double sign = dot(g, truth) < 0.0 ? -1.0 : 1.0;
  for (double& v : g) v *= sign / norm;
  return g;
}

int thread_count(int jobs) { return std::max(1, jobs); }

CellReport reduce(const CellSpec& cell, double t, std::vector<ReplicationResult>& results) {
  CellReport out;
  out.cell = cell;
  out.t = t;
  out.d = cell.resolved_d();
  out.d_g = cell.resolved_d_g(t);
  const bool censored = cell.model.censoring.has_value();
  out.two_stage.method = cell.family == Stage2Family::Sir ? "SIR-SIR" : "SIR-SAVE";
  out.direct.method = cell.family == Stage2Family::Sir ? "SIR" : "SAVE";
  if (censored) {
    out.two_stage.method += " (censored)";
    out.direct.method += " (censored)";
  }
  std::vector<double> two, dir;
  for (const auto& r : results) out.censoring_rate += r.censoring_rate / static_cast<double>(results.size());
  for (auto& r : results) {
    if (!r.ok) {
      ++out.failed;
      ++out.failures_by_kind[r.error ? std::string(to_string(*r.error)) : std::string("Unknown")];
      continue;
    }
    ++out.succeeded;
    two.push_back(r.two_stage);
    dir.push_back(r.direct);
    if (cell.record_directions) {
      out.directions_two_stage.push_back(std::move(r.direction_two_stage));
      out.directions_direct.push_back(std::move(r.direction_direct));
    }
  }
  const double root = std::sqrt(static_cast<double>(std::max<std::size_t>(1, two.size())));
  out.two_stage.mean = sample_mean(two);
  out.two_stage.se = sample_sd(two) / root;
  out.direct.mean = sample_mean(dir);
  out.direct.se = sample_sd(dir) / root;
  out.flagged = static_cast<double>(out.failed) > kFailureFlagFraction * static_cast<double>(cell.reps);
  if (out.flagged)
    out.warnings.push_back(std::to_string(out.failed) + " of " + std::to_string(cell.reps) +
                           " replications failed");
  if (out.succeeded == 0) out.warnings.push_back("no replication succeeded");
  return out;
}

std::set<double> percents_for(const std::vector<CellSpec>& cells, const std::string& key) {
  std::set<double> out;
  for (const auto& c : cells)
    if (QuantileTable::law_key(c.model) == key) out.insert(c.percent);
  return out;
}

}  // namespace

std::string to_string(Stage2Family f) { return f == Stage2Family::Sir ? "sir" : "save"; }

void CellSpec::validate() const {
  model.validate();
  if (reps < 1) throw Error(ErrorKind::ConfigError, "reps must be at least 1");
  if (!(percent > 0.0 && percent < 100.0)) throw Error(ErrorKind::ConfigError, "percent must lie in (0, 100)");
  if (n <= model.p() + 1) throw Error(ErrorKind::ConfigError, "n must exceed p + 1");
  if (h < 2 || h0 < 1 || h1 < 1) throw Error(ErrorKind::ConfigError, "slice counts must be positive (h >= 2)");
  if (d > model.p()) throw Error(ErrorKind::ConfigError, "d exceeds p");
  if (d != 0 && d_g > d) throw Error(ErrorKind::ConfigError, "d_g exceeds d");
}

std::size_t CellSpec::resolved_d() const { return d != 0 ? d : true_basis(model).cols(); }

std::size_t CellSpec::resolved_d_g(double t) const {
  return d_g != 0 ? d_g : true_induced_basis(model, t).cols();
}

SdrMethod CellSpec::stage1_method() const {
  return model.censoring ? SdrMethod::sir_double_slice(h0, h1) : SdrMethod::sir(h);
}

SdrMethod CellSpec::stage2_method(double t) const {
  if (model.censoring) {
    SdrMethod m = family == Stage2Family::Sir ? SdrMethod::sir_binary_censored(t) : SdrMethod::save_binary_censored(t);
    m.censoring = censoring;
    return m;
  }
  const InducedResponse g = InducedResponse::threshold(t);
  return family == Stage2Family::Sir ? SdrMethod::sir_binary(g) : SdrMethod::save_binary(g);
}

ReplicationResult run_replication(const CellSpec& cell, double t, std::size_t rep) {
  ReplicationResult out;
  try {
    Rng rng = Rng::substream(cell.seed, rep);
    const Simulated sim = generate(cell.model, cell.n, rng);
    if (sim.data.status) {
      std::size_t censored = 0;
      for (int s : *sim.data.status) censored += s == 0;
      out.censoring_rate = static_cast<double>(censored) / static_cast<double>(cell.n);
    }
    const Matrix truth_cols = true_induced_basis(cell.model, t);
    const Subspace truth = Subspace::span_of(truth_cols);
    const std::size_t d = cell.resolved_d();
    const std::size_t d_g = cell.resolved_d_g(t);
    const SdrMethod stage2 = cell.stage2_method(t);
    const FitResult two = fit_two_stage(sim.data, cell.stage1_method(), stage2, d, d_g);
    const FitResult dir = fit_direct(sim.data, stage2, d_g);
    out.two_stage = frobenius_span_distance(Subspace::span_of(two.gamma_hat), truth);
    out.direct = frobenius_span_distance(Subspace::span_of(dir.gamma_hat), truth);
    if (cell.record_directions) {
      const Vector first = truth_cols.col(0);
      out.direction_two_stage = aligned_direction(two.gamma_hat, first);
      out.direction_direct = aligned_direction(dir.gamma_hat, first);
    }
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.kind();
    out.message = e.what();
  }
  return out;
}

CellReport run_cell(const CellSpec& cell, double t, int jobs) {
  cell.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<ReplicationResult> results(cell.reps);
  const auto reps = static_cast<long>(cell.reps);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (long r = 0; r < reps; ++r) results[static_cast<std::size_t>(r)] = run_replication(cell, t, static_cast<std::size_t>(r));
  CellReport out = reduce(cell, t, results);
  out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

CellReport run_cell_serial(const CellSpec& cell, double t) {
  cell.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<ReplicationResult> results;
  results.reserve(cell.reps);
  for (std::size_t r = 0; r < cell.reps; ++r) results.push_back(run_replication(cell, t, r));
  CellReport out = reduce(cell, t, results);
  out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

TableReport run_table(const std::vector<CellSpec>& cells, int jobs, std::size_t quantile_draws,
                      std::uint64_t quantile_seed) {
  TableReport out;
  for (const auto& c : cells) c.validate();
  for (const auto& c : cells) {
    const std::string key = QuantileTable::law_key(c.model);
    if (out.quantiles.count(key)) continue;
    const auto pcts = percents_for(cells, key);
    out.quantiles[key] = QuantileEntry{c.model.name, c.model.p(),
                                       QuantileTable(c.model, {pcts.begin(), pcts.end()}, quantile_draws, quantile_seed)};
  }
  for (const auto& c : cells) {
    const double t = out.quantiles.at(QuantileTable::law_key(c.model)).table.at(c.percent);
    out.cells.push_back(run_cell(c, t, jobs));
    if (out.cells.back().flagged) ++out.flagged_cells;
  }
  return out;
}

namespace {

struct GridPoint {
  std::size_t n;
  std::size_t p;
  bool censored;
};

// Grid column order: (100,10,0%), (100,20,0%), (100,10,25%), (50,10,0%).
constexpr GridPoint kGrid[] = {{100, 10, false}, {100, 20, false}, {100, 10, true}, {50, 10, false}};

std::string grid_label(const GridPoint& g) {
  return "(" + std::to_string(g.n) + "," + std::to_string(g.p) + "," + (g.censored ? "25%" : "0%") + ")";
}

std::vector<CellSpec> table1_cells(std::size_t reps, std::uint64_t seed, bool model5) {
  const double pcts4[] = {30, 50, 70};
  const double pcts5[] = {45, 65, 75};
  const double* pcts = model5 ? pcts5 : pcts4;
  std::vector<CellSpec> out;
  std::uint64_t index = model5 ? 100 : 0;
  for (int k = 0; k < 3; ++k) {
    for (const auto& g : kGrid) {
      CellSpec c;
      c.model = model5 ? piecewise_hazard_model(g.p, g.censored) : lognormal_ratio_model(g.p, g.censored);
      c.n = g.n;
      c.percent = pcts[k];
      c.family = model5 ? Stage2Family::Save : Stage2Family::Sir;
      c.reps = reps;
      c.seed = derive_seed(seed, index++);
      c.label = std::string(model5 ? "model5" : "model4") + " t" + std::to_string(static_cast<int>(pcts[k])) + " " +
                grid_label(g);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace

std::vector<CellSpec> table1_model4_cells(std::size_t reps, std::uint64_t seed) {
  return table1_cells(reps, seed, false);
}

std::vector<CellSpec> table1_model5_cells(std::size_t reps, std::uint64_t seed) {
  return table1_cells(reps, seed, true);
}

namespace {

DirectionSummary summarize_directions(std::string branch, const std::vector<std::optional<Vector>>& dirs,
                                      std::size_t p) {
  DirectionSummary s;
  s.branch = std::move(branch);
  s.mean.assign(p, 0.0);
  s.sd.assign(p, 0.0);
  std::vector<std::vector<double>> coords(p);
  for (const auto& d : dirs) {
    if (!d) {
      ++s.failed;
      continue;
    }
    ++s.succeeded;
    for (std::size_t k = 0; k < p; ++k) coords[k].push_back((*d)[k]);
  }
  for (std::size_t k = 0; k < p; ++k) {
    s.mean[k] = sample_mean(coords[k]);
    s.sd[k] = sample_sd(coords[k]);
  }
  return s;
}

std::optional<Vector> first_normalized(const Matrix& gamma_hat) {
  Vector g = gamma_hat.col(0);
  if (g[0] == 0.0) return std::nullopt;
  const double g0 = g[0];
  for (double& v : g) v /= g0;
  return g;
}

}  // namespace

IntroReport run_intro_scenario(std::uint64_t seed, std::size_t reps, std::size_t n, int h, int jobs,
                               std::size_t quantile_draws) {
  if (reps < 1) throw Error(ErrorKind::ConfigError, "reps must be at least 1");
  const ModelSpec model = intro_gamma_model();
  IntroReport out;
  out.t = QuantileTable(model, {50.0}, quantile_draws).at(50.0);
  out.n = n;
  out.reps = reps;
  out.h = h;
  out.seed = seed;
  const SdrMethod full = SdrMethod::sir(h);
  const SdrMethod induced = SdrMethod::sir_binary(InducedResponse::threshold(out.t));
  std::vector<std::optional<Vector>> a(reps), b(reps);
  const auto count = static_cast<long>(reps);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (long r = 0; r < count; ++r) {
    const auto i = static_cast<std::size_t>(r);
    try {
      Rng rng = Rng::substream(seed, i);
      const Simulated sim = generate(model, n, rng);
      a[i] = first_normalized(fit_direct(sim.data, full, 1).gamma_hat);
      b[i] = first_normalized(fit_direct(sim.data, induced, 1).gamma_hat);
    } catch (const Error&) {
    }
  }
  out.full = summarize_directions("SIR on (Y,X)", a, model.p());
  out.induced = summarize_directions("SIR on (Y_g,X)", b, model.p());
  return out;
}

double MercStudy::recovery_rate() const {
  const auto it = d_hat_counts.find(true_d);
  return reps == 0 || it == d_hat_counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(reps);
}

std::size_t MercStudy::majority_d_g(double percent) const {
  const auto it = d_g_hat_counts.find(percent);
  if (it == d_g_hat_counts.end() || it->second.empty()) return 0;
  std::size_t best = 0, best_count = 0;
  for (const auto& [dim, cnt] : it->second)
    if (cnt > best_count) {
      best = dim;
      best_count = cnt;
    }
  return best;
}

MercStudy run_merc_study(const ModelSpec& model, Stage2Family family, std::size_t n, std::size_t reps,
                         const std::vector<double>& percents, std::uint64_t seed, int jobs, std::size_t d_star,
                         std::size_t quantile_draws) {
  if (model.censoring) throw Error(ErrorKind::ConfigError, "MERC study runs on complete data");
  MercStudy out;
  out.model_name = model.name;
  out.n = n;
  out.reps = reps;
  out.true_d = true_basis(model).cols();
  out.d_star = d_star;
  const QuantileTable q(model, percents, quantile_draws);
  for (double a : percents) out.thresholds[a] = q.at(a);

  struct Rep {
    bool ok = false;
    std::size_t d = 0;
    std::vector<std::size_t> d_g;
  };
  std::vector<Rep> results(reps);
  const auto count = static_cast<long>(reps);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (long r = 0; r < count; ++r) {
    auto& res = results[static_cast<std::size_t>(r)];
    try {
      Rng rng = Rng::substream(seed, static_cast<std::size_t>(r));
      const Simulated sim = generate(model, n, rng);
      for (double a : percents) {
        const InducedResponse g = InducedResponse::threshold(out.thresholds.at(a));
        const SdrMethod stage2 = family == Stage2Family::Sir ? SdrMethod::sir_binary(g) : SdrMethod::save_binary(g);
        const MercFit fit = fit_two_stage_merc(sim.data, SdrMethod::sir(10), stage2, d_star);
        res.d = fit.stage1.dim;
        res.d_g.push_back(fit.induced.dim);
      }
      res.ok = true;
    } catch (const Error&) {
    }
  }
  for (const auto& res : results) {
    if (!res.ok) {
      ++out.failed;
      continue;
    }
    ++out.d_hat_counts[res.d];
    for (std::size_t k = 0; k < percents.size(); ++k) ++out.d_g_hat_counts[percents[k]][res.d_g[k]];
  }
  return out;
}

}  // namespace tsdr
