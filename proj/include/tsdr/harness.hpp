#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsdr/error.hpp"
#include "tsdr/estimator.hpp"
#include "tsdr/simgen.hpp"

namespace tsdr {

// Stage-2 kernel family. Stage 1 is always SIR on the full response
// (double-sliced when the data are censored).
enum class Stage2Family { Sir, Save };

std::string to_string(Stage2Family f);

struct CellSpec {
  std::string label;
  ModelSpec model;
  std::size_t n = 100;
  double percent = 50.0;  // t is the percent% quantile of Y
  Stage2Family family = Stage2Family::Sir;
  int h = 10;
  int h0 = 5;
  int h1 = 10;
  std::size_t d = 0;    // 0: rank of the model's Γ
  std::size_t d_g = 0;  // 0: rank of the model's Γ_g at t
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  CensoredMomentOptions censoring{};
  bool record_directions = false;

  void validate() const;
  std::size_t resolved_d() const;
  std::size_t resolved_d_g(double t) const;
  SdrMethod stage1_method() const;
  SdrMethod stage2_method(double t) const;
};

struct ReplicationResult {
  bool ok = false;
  double two_stage = 0.0;  // ‖P̂ − P‖_F for the two-stage fit
  double direct = 0.0;
  double censoring_rate = 0.0;
  std::optional<ErrorKind> error;
  std::string message;
  // First column of Γ̂_g, unit length, sign aligned with the truth (when recorded).
  Vector direction_two_stage;
  Vector direction_direct;
};

struct MethodSummary {
  std::string method;
  double mean = 0.0;
  double se = 0.0;  // sd / sqrt(successful reps)
};

struct CellReport {
  CellSpec cell;
  double t = 0.0;
  std::size_t d = 0;
  std::size_t d_g = 0;
  MethodSummary two_stage;
  MethodSummary direct;
  double censoring_rate = 0.0;  // mean over all replications
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> failures_by_kind;
  bool flagged = false;  // more than 5% of replications failed
  double elapsed_seconds = 0.0;
  std::vector<std::string> warnings;
  std::vector<Vector> directions_two_stage;
  std::vector<Vector> directions_direct;
};

inline constexpr double kFailureFlagFraction = 0.05;

// One replication of a cell; the data come from substream `rep` of cell.seed.
ReplicationResult run_replication(const CellSpec& cell, double t, std::size_t rep);

// Replications run on `jobs` OpenMP threads; results are reduced in replication order.
CellReport run_cell(const CellSpec& cell, double t, int jobs);
// Single-threaded reference for run_cell.
CellReport run_cell_serial(const CellSpec& cell, double t);

struct QuantileEntry {
  std::string model_name;
  std::size_t p = 0;
  QuantileTable table;
};

struct TableReport {
  std::vector<CellReport> cells;
  std::map<std::string, QuantileEntry> quantiles;  // keyed by QuantileTable::law_key
  std::size_t flagged_cells = 0;
};

// Quantiles are computed once per response law (censoring ignored) before any cell runs.
TableReport run_table(const std::vector<CellSpec>& cells, int jobs, std::size_t quantile_draws = kQuantileDraws,
                      std::uint64_t quantile_seed = kQuantileSeed);

// Benchmark grids of the two survival models. Cell seeds are derived from `seed` and the cell's position.
std::vector<CellSpec> table1_model4_cells(std::size_t reps, std::uint64_t seed);
std::vector<CellSpec> table1_model5_cells(std::size_t reps, std::uint64_t seed);

struct DirectionSummary {
  std::string branch;
  Vector mean;  // coordinates of Γ̂ / Γ̂₁
  Vector sd;    // spread across replications
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

struct IntroReport {
  double t = 0.0;
  std::size_t n = 0;
  std::size_t reps = 0;
  int h = 0;
  std::uint64_t seed = 0;
  DirectionSummary full;     // SIR on (Y, X)
  DirectionSummary induced;  // SIR on (Y_g, X), Y_g = I(Y <= t50)
};

IntroReport run_intro_scenario(std::uint64_t seed, std::size_t reps = 500, std::size_t n = 300, int h = 10,
                               int jobs = 1, std::size_t quantile_draws = kQuantileDraws);

struct MercStudy {
  std::string model_name;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t true_d = 0;
  std::size_t d_star = 5;
  std::map<std::size_t, std::size_t> d_hat_counts;
  // percent -> (d̂_g -> count)
  std::map<double, std::map<std::size_t, std::size_t>> d_g_hat_counts;
  std::map<double, double> thresholds;
  std::size_t failed = 0;

  double recovery_rate() const;
  // Most frequent d̂_g at `percent`; the smaller dimension wins ties.
  std::size_t majority_d_g(double percent) const;
};

// MERC on complete data: d̂ from the stage-1 SIR kernel, d̂_g from the projected stage-2 kernel.
MercStudy run_merc_study(const ModelSpec& model, Stage2Family family, std::size_t n, std::size_t reps,
                         const std::vector<double>& percents, std::uint64_t seed, int jobs, std::size_t d_star = 5,
                         std::size_t quantile_draws = kQuantileDraws);

}  // namespace tsdr
