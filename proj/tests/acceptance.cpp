// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "property_checks.hpp"
#include "tsdr/harness.hpp"

using namespace tsdr;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr std::size_t kReps = 500;

constexpr double kTolModel4 = 0.05;
constexpr double kTolModel4Censored = 0.06;
constexpr double kTolModel5 = 0.10;
constexpr double kMaxModel4Seconds = 180.0;
constexpr double kTolIntroMeanFull = 0.10;
constexpr double kTolIntroMeanInduced = 0.15;
constexpr double kTolIntroSeRelative = 0.35;
constexpr double kMercRecovery = 0.90;
constexpr std::size_t kMercN = 400;
constexpr std::size_t kMercReps = 200;

struct Reference {
  double two_stage;
  double direct;
};

// Reference means keyed by cell label.
const std::map<std::string, Reference> kTable1 = {
    {"model4 t30 (100,10,0%)", {0.241, 0.358}}, {"model4 t30 (100,20,0%)", {0.320, 0.558}},
    {"model4 t30 (100,10,25%)", {0.343, 0.451}}, {"model4 t30 (50,10,0%)", {0.326, 0.515}},
    {"model4 t50 (100,10,0%)", {0.181, 0.309}}, {"model4 t50 (100,20,0%)", {0.278, 0.490}},
    {"model4 t50 (100,10,25%)", {0.317, 0.408}}, {"model4 t50 (50,10,0%)", {0.265, 0.455}},
    {"model4 t70 (100,10,0%)", {0.239, 0.363}}, {"model4 t70 (100,20,0%)", {0.323, 0.558}},
    {"model4 t70 (100,10,25%)", {0.357, 0.469}}, {"model4 t70 (50,10,0%)", {0.333, 0.521}},
    {"model5 t45 (100,10,0%)", {0.572, 0.676}}, {"model5 t45 (100,20,0%)", {0.805, 1.042}},
    {"model5 t45 (100,10,25%)", {0.581, 0.697}}, {"model5 t45 (50,10,0%)", {0.815, 1.002}},
    {"model5 t65 (100,10,0%)", {1.022, 1.354}}, {"model5 t65 (100,20,0%)", {1.449, 1.705}},
    {"model5 t65 (100,10,25%)", {1.101, 1.415}}, {"model5 t65 (50,10,0%)", {1.391, 1.572}},
    {"model5 t75 (100,10,0%)", {1.129, 1.775}}, {"model5 t75 (100,20,0%)", {1.600, 2.176}},
    {"model5 t75 (100,10,25%)", {1.365, 1.844}}, {"model5 t75 (50,10,0%)", {1.538, 1.952}},
};

struct IntroReference {
  double mean2, mean3, se2, se3;
};
constexpr IntroReference kIntroFull{1.995, 0.001, 0.071, 0.030};
constexpr IntroReference kIntroInduced{2.030, 0.003, 0.261, 0.115};

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b, double c, double d) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool censored(const CellReport& c) { return c.cell.model.censoring.has_value(); }

// Cells outside `tol` of the published means, as "label".
std::string band_misses(const std::vector<const CellReport*>& cells, double tol, int& misses) {
  std::string out;
  for (const CellReport* c : cells) {
    const Reference& ref = kTable1.at(c->cell.label);
    const bool ok = std::abs(c->two_stage.mean - ref.two_stage) <= tol && std::abs(c->direct.mean - ref.direct) <= tol;
    std::printf("  %-26s two-stage %.3f (ref %.3f)  direct %.3f (ref %.3f)%s\n", c->cell.label.c_str(),
                c->two_stage.mean, ref.two_stage, c->direct.mean, ref.direct, ok ? "" : "  <- outside band");
    if (!ok) {
      ++misses;
      out += (out.empty() ? "" : "; ") + c->cell.label;
    }
  }
  return out;
}

std::vector<const CellReport*> select(const TableReport& r, const std::function<bool(const CellReport&)>& keep) {
  std::vector<const CellReport*> out;
  for (const CellReport& c : r.cells)
    if (keep(c)) out.push_back(&c);
  return out;
}

void criteria_1_2(const TableReport& m4, double seconds) {
  int misses = 0;
  const std::string where = band_misses(select(m4, [](const CellReport& c) { return !censored(c); }), kTolModel4, misses);
  report(1, misses == 0 && seconds < kMaxModel4Seconds,
         "model 4 complete-data cells within +-0.05 (" + std::to_string(9 - misses) + "/9), model 4 grid took " +
             std::to_string(seconds) + " s" + (where.empty() ? "" : "; misses: " + where));
  misses = 0;
  const std::string cwhere =
      band_misses(select(m4, [](const CellReport& c) { return censored(c); }), kTolModel4Censored, misses);
  report(2, misses == 0,
         "model 4 censored cells within +-0.06 (" + std::to_string(3 - misses) + "/3)" +
             (cwhere.empty() ? "" : "; misses: " + cwhere));
}

void criterion_3(const TableReport& m5) {
  int misses = 0;
  const std::string where = band_misses(select(m5, [](const CellReport&) { return true; }), kTolModel5, misses);
  report(3, misses == 0,
         "model 5 cells within +-0.10 (" + std::to_string(12 - misses) + "/12)" +
             (where.empty() ? "" : "; misses: " + where));
}

void criterion_4(const TableReport& m4, const TableReport& m5) {
  int inverted = 0;
  for (const TableReport* r : {&m4, &m5})
    for (const CellReport& c : r->cells) inverted += !(c.two_stage.mean < c.direct.mean);
  // Gain per (n,p,CR) column must grow through t45 < t65 < t75.
  std::map<std::string, std::vector<double>> gains;
  for (const CellReport& c : m5.cells) {
    const std::string column = c.cell.label.substr(c.cell.label.find('('));
    gains[column].push_back(c.direct.mean - c.two_stage.mean);
  }
  int flat = 0;
  std::string detail;
  for (const auto& [column, g] : gains) {
    const bool grows = g.size() == 3 && g[0] < g[1] && g[1] < g[2];
    flat += !grows;
    detail += " " + column + fmt(" %.3f/%.3f/%.3f", g[0], g[1], g[2], 0).substr(0, 18);
  }
  report(4, inverted == 0 && flat == 0,
         "two-stage below direct in " + std::to_string(24 - inverted) + "/24 cells; model 5 gain grows in t in " +
             std::to_string(4 - flat) + "/4 columns:" + detail);
}

bool intro_branch(const DirectionSummary& s, const IntroReference& ref, double mean_tol, std::string& detail) {
  const bool means = std::abs(s.mean[1] - ref.mean2) <= mean_tol && std::abs(s.mean[2] - ref.mean3) <= mean_tol;
  const bool ses = std::abs(s.sd[1] / ref.se2 - 1.0) <= kTolIntroSeRelative &&
                   std::abs(s.sd[2] / ref.se3 - 1.0) <= kTolIntroSeRelative;
  detail += s.branch + fmt(" means (%.3f, %.3f) SEs (%.3f, %.3f)", s.mean[1], s.mean[2], s.sd[1], s.sd[2]);
  detail += fmt(" vs ref (%.3f, %.3f) (%.3f, %.3f)", ref.mean2, ref.mean3, ref.se2, ref.se3);
  detail += std::string(means ? "" : " [means outside]") + (ses ? "" : " [SEs outside]") + "; ";
  return means && ses;
}

void criterion_5() {
  const IntroReport r = run_intro_scenario(kSeed, kReps, 300, 10, 1);
  std::string detail;
  const bool full = intro_branch(r.full, kIntroFull, kTolIntroMeanFull, detail);
  const bool induced = intro_branch(r.induced, kIntroInduced, kTolIntroMeanInduced, detail);
  report(5, full && induced, detail.substr(0, detail.size() - 2));
}

void criterion_6() {
  CellSpec cell = table1_model4_cells(kReps, kSeed)[4];  // t50 (100,10,0%)
  cell.record_directions = true;
  const double t = response_quantile(cell.model, cell.percent);
  const CellReport r = run_cell(cell, t, 1);
  const std::size_t p = cell.model.p();
  auto variances = [p](const std::vector<Vector>& dirs) {
    Vector mean(p, 0.0), var(p, 0.0);
    for (const Vector& v : dirs)
      for (std::size_t j = 0; j < p; ++j) mean[j] += v[j] / static_cast<double>(dirs.size());
    for (const Vector& v : dirs)
      for (std::size_t j = 0; j < p; ++j) var[j] += (v[j] - mean[j]) * (v[j] - mean[j]) / (dirs.size() - 1.0);
    return var;
  };
  const Vector v2 = variances(r.directions_two_stage), vd = variances(r.directions_direct);
  double t2 = 0, td = 0;
  int worse = 0;
  for (std::size_t j = 0; j < p; ++j) {
    t2 += v2[j];
    td += vd[j];
    worse += v2[j] > vd[j];
  }
  report(6, worse == 0 && t2 < td,
         "model 4 t50 (100,10,0%): two-stage coordinate variance above direct in " + std::to_string(worse) + "/" +
             std::to_string(p) + " coordinates; total " + fmt("%.4f vs %.4f", t2, td, 0, 0));
}

void criterion_7() {
  const std::vector<std::pair<std::string, checks::Outcome>> suites = {
      {"eigen reconstruction", checks::eigen_reconstruction(101, 200)},
      {"inverse square root", checks::inv_sqrt_identities(102, 200)},
      {"Moore-Penrose", checks::moore_penrose(103, 200)},
      {"Frobenius axioms", checks::frobenius_axioms(104, 200)},
      {"KM brute force n<=10", checks::km_brute_force(105, 10)},
      {"censored reductions", checks::censored_reductions(106, 50)},
      {"projection idempotence", checks::projection_idempotence(107, 50)},
      {"affine equivariance", checks::affine_equivariance(108, 30)},
      {"seed determinism", checks::seed_determinism(109)},
      {"parallel equals serial", checks::parallel_matches_serial(110, 4)},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [name, o] : suites) {
    std::printf("  %-24s %s (%d cases)%s%s\n", name.c_str(), o.ok ? "ok" : "VIOLATED", o.cases,
                o.ok ? "" : ": ", o.detail.c_str());
    if (!o.ok) detail += (detail.empty() ? "" : ", ") + name;
    ok = ok && o.ok;
  }
  report(7, ok, ok ? "all " + std::to_string(suites.size()) + " property suites hold" : "violated: " + detail);
}

std::string counts(const std::map<std::size_t, std::size_t>& m) {
  std::string s;
  for (const auto& [d, c] : m) s += (s.empty() ? "" : " ") + std::to_string(d) + ":" + std::to_string(c);
  return "{" + s + "}";
}

void criterion_8() {
  const MercStudy m4 = run_merc_study(lognormal_ratio_model(10, false), Stage2Family::Sir, kMercN, kMercReps, {50},
                                      kSeed, 1);
  const MercStudy m5 = run_merc_study(piecewise_hazard_model(10, false), Stage2Family::Save, kMercN, kMercReps,
                                      {45, 65, 75}, kSeed, 1);
  const std::size_t g45 = m5.majority_d_g(45), g65 = m5.majority_d_g(65), g75 = m5.majority_d_g(75);
  const bool ok = m4.recovery_rate() >= kMercRecovery && m5.recovery_rate() >= kMercRecovery && g45 == 1 &&
                  g65 == 2 && g75 == 3;
  std::string detail = fmt("d-hat recovery model 4 %.1f%% (d=2) model 5 %.1f%% (d=3)", 100 * m4.recovery_rate(),
                           100 * m5.recovery_rate(), 0, 0);
  detail += "; counts model 4 " + counts(m4.d_hat_counts) + " model 5 " + counts(m5.d_hat_counts);
  detail += "; model 5 d_g majority t45/t65/t75 = " + std::to_string(g45) + "/" + std::to_string(g65) + "/" +
            std::to_string(g75) + " (want 1/2/3), t75 counts " + counts(m5.d_g_hat_counts.at(75));
  report(8, ok, detail);
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const TableReport m4 = run_table(table1_model4_cells(kReps, kSeed), 1);
  const double m4_seconds = std::chrono::duration<double>(clock::now() - start).count();
  const TableReport m5 = run_table(table1_model5_cells(kReps, kSeed), 1);

  criteria_1_2(m4, m4_seconds);
  criterion_3(m5);
  criterion_4(m4, m5);
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();

  std::printf("%d of 8 criteria failed; total %.1f s\n", failures,
              std::chrono::duration<double>(clock::now() - start).count());
  return failures == 0 ? 0 : 1;
}
