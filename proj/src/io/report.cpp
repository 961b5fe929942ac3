#include "tsdr/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "tsdr/error.hpp"
#include "tsdr/rng.hpp"

namespace tsdr {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw Error(ErrorKind::ConfigError, "unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, "bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

Stage2Family family_from(const std::string& s) {
  if (s == "sir") return Stage2Family::Sir;
  if (s == "save") return Stage2Family::Save;
  throw Error(ErrorKind::ConfigError, "unknown family '" + s + "' (expected sir or save)");
}

Group0Normalization group0_from(const std::string& s) {
  if (s == "risk-set") return Group0Normalization::RiskSetCount;
  if (s == "km") return Group0Normalization::KaplanMeier;
  throw Error(ErrorKind::ConfigError, "unknown group0 normalization '" + s + "'");
}

CensoringWeightAt weight_at_from(const std::string& s) {
  if (s == "right-continuous") return CensoringWeightAt::RightContinuous;
  if (s == "left-limit") return CensoringWeightAt::LeftLimit;
  throw Error(ErrorKind::ConfigError, "unknown censoring weight position '" + s + "'");
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string percent_label(double a) {
  std::ostringstream os;
  os << "t" << a;
  return os.str();
}

json method_json(const MethodSummary& m) { return {{"method", m.method}, {"mean", m.mean}, {"se", m.se}}; }

json quantiles_json(const TableReport& report) {
  json out = json::array();
  for (const auto& [key, entry] : report.quantiles) {
    json values = json::object();
    for (const auto& [a, v] : entry.table.values()) values[percent_label(a)] = v;
    out.push_back({{"model", entry.model_name},
                   {"p", entry.p},
                   {"draws", entry.table.draws()},
                   {"seed", entry.table.seed()},
                   {"values", values}});
  }
  return out;
}

}  // namespace

std::string to_string(Group0Normalization g) {
  return g == Group0Normalization::RiskSetCount ? "risk-set" : "km";
}

std::string to_string(CensoringWeightAt w) {
  return w == CensoringWeightAt::RightContinuous ? "right-continuous" : "left-limit";
}

json to_json(const CellSpec& c) {
  return {{"label", c.label},
          {"model", c.model},
          {"n", c.n},
          {"percent", c.percent},
          {"family", to_string(c.family)},
          {"h", c.h},
          {"h0", c.h0},
          {"h1", c.h1},
          {"d", c.d},
          {"d_g", c.d_g},
          {"reps", c.reps},
          {"seed", c.seed},
          {"group0_normalization", to_string(c.censoring.group0)},
          {"censoring_weight_at", to_string(c.censoring.weight_at)},
          {"min_censoring_survival", c.censoring.min_censoring_survival}};
}

CellSpec cell_from_json(const json& j) {
  const std::string where = "cell";
  reject_unknown(j,
                 {"label", "model", "n", "percent", "family", "h", "h0", "h1", "d", "d_g", "reps", "seed",
                  "group0_normalization", "censoring_weight_at", "min_censoring_survival"},
                 where);
  if (!j.contains("model")) throw Error(ErrorKind::ConfigError, "cell needs a model");
  CellSpec c;
  c.model = j.at("model").get<ModelSpec>();
  c.label = get_or<std::string>(j, "label", c.model.name, where);
  c.n = get_or<std::size_t>(j, "n", c.n, where);
  c.percent = get_or<double>(j, "percent", c.percent, where);
  c.family = family_from(get_or<std::string>(j, "family", "sir", where));
  c.h = get_or<int>(j, "h", c.h, where);
  c.h0 = get_or<int>(j, "h0", c.h0, where);
  c.h1 = get_or<int>(j, "h1", c.h1, where);
  c.d = get_or<std::size_t>(j, "d", c.d, where);
  c.d_g = get_or<std::size_t>(j, "d_g", c.d_g, where);
  c.reps = get_or<std::size_t>(j, "reps", c.reps, where);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, where);
  c.censoring.group0 = group0_from(get_or<std::string>(j, "group0_normalization", "risk-set", where));
  c.censoring.weight_at = weight_at_from(get_or<std::string>(j, "censoring_weight_at", "right-continuous", where));
  c.censoring.min_censoring_survival =
      get_or<double>(j, "min_censoring_survival", c.censoring.min_censoring_survival, where);
  c.validate();
  return c;
}

json to_json(const SimulationConfig& config) {
  json j = {{"preset", config.preset},
            {"seed", config.seed},
            {"quantile_draws", config.quantile_draws},
            {"quantile_seed", config.quantile_seed}};
  json cells = json::array();
  for (const auto& c : config.cells) cells.push_back(to_json(c));
  j["cells"] = cells;
  if (config.intro)
    j["intro"] = {{"seed", config.intro->seed}, {"reps", config.intro->reps}, {"n", config.intro->n}, {"h", config.intro->h}};
  return j;
}

SimulationConfig simulation_config_from_json(const json& input) {
  const json& j = input.contains("config") && input.contains("tool") ? input.at("config") : input;
  const std::string where = "config";
  reject_unknown(j, {"preset", "seed", "quantile_draws", "quantile_seed", "cells", "intro"}, where);
  SimulationConfig c;
  c.preset = get_or<std::string>(j, "preset", c.preset, where);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, where);
  c.quantile_draws = get_or<std::size_t>(j, "quantile_draws", c.quantile_draws, where);
  c.quantile_seed = get_or<std::uint64_t>(j, "quantile_seed", c.quantile_seed, where);
  if (c.quantile_draws == 0) throw Error(ErrorKind::ConfigError, "quantile_draws must be positive");
  if (j.contains("cells")) {
    if (!j.at("cells").is_array()) throw Error(ErrorKind::ConfigError, "cells must be an array");
    for (const auto& cell : j.at("cells")) c.cells.push_back(cell_from_json(cell));
  }
  if (j.contains("intro") && !j.at("intro").is_null()) {
    const json& i = j.at("intro");
    reject_unknown(i, {"seed", "reps", "n", "h"}, "intro");
    IntroConfig ic;
    ic.seed = get_or<std::uint64_t>(i, "seed", ic.seed, "intro");
    ic.reps = get_or<std::size_t>(i, "reps", ic.reps, "intro");
    ic.n = get_or<std::size_t>(i, "n", ic.n, "intro");
    ic.h = get_or<int>(i, "h", ic.h, "intro");
    if (ic.reps < 1 || ic.n < 5 || ic.h < 2) throw Error(ErrorKind::ConfigError, "intro needs reps >= 1, n >= 5, h >= 2");
    c.intro = ic;
  }
  if (c.cells.empty() && !c.intro) throw Error(ErrorKind::ConfigError, "config has neither cells nor intro");
  return c;
}

json provenance(const SimulationConfig& config) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"rng", kRngAlgorithm},
          {"seed", config.seed},
          {"conventions",
           {{"intro_gamma", "shape 2exp(a'X), scale 0.5"},
            {"lognormal_noise", "second argument of N(m, s) read per model 'noise' (sd or variance)"},
            {"censoring_gamma", "second argument read per model censoring 'convention'"},
            {"censored_group0", "per cell 'group0_normalization'"},
            {"quantile", "inverse empirical CDF: order statistic ceil(a n / 100)"},
            {"se", "sample sd / sqrt(successful replications)"}}},
          {"config", to_json(config)}};
}

std::string table_tsv(const TableReport& report) {
  struct Column {
    std::size_t n, p;
    bool censored;
    double rate_sum = 0.0;
    std::size_t count = 0;
  };
  std::vector<Column> columns;
  std::vector<std::pair<std::string, double>> rows;  // (model name, percent)
  auto column_of = [&](const CellReport& r) -> std::size_t {
    const bool cens = r.cell.model.censoring.has_value();
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (columns[k].n == r.cell.n && columns[k].p == r.cell.model.p() && columns[k].censored == cens) return k;
    columns.push_back({r.cell.n, r.cell.model.p(), cens});
    return columns.size() - 1;
  };
  auto row_of = [&](const CellReport& r) -> std::size_t {
    const std::pair<std::string, double> key{r.cell.model.name, r.cell.percent};
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (rows[k] == key) return k;
    rows.push_back(key);
    return rows.size() - 1;
  };
  std::vector<std::tuple<std::size_t, std::size_t, const CellReport*>> placed;
  for (const auto& r : report.cells) {
    const std::size_t c = column_of(r);
    columns[c].rate_sum += r.censoring_rate;
    ++columns[c].count;
    placed.emplace_back(row_of(r), c, &r);
  }

  std::ostringstream os;
  os << "model\tt\tmethod";
  for (const auto& c : columns) {
    const double rate = c.count ? 100.0 * c.rate_sum / static_cast<double>(c.count) : 0.0;
    os << "\t(" << c.n << "," << c.p << "," << std::lround(rate) << "%)";
  }
  os << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> two(columns.size(), "NA"), dir(columns.size(), "NA");
    std::string two_name, dir_name;
    for (const auto& [row, col, cell] : placed) {
      if (row != r) continue;
      two[col] = cell->succeeded ? fixed3(cell->two_stage.mean) : "NA";
      dir[col] = cell->succeeded ? fixed3(cell->direct.mean) : "NA";
      two_name = cell->cell.family == Stage2Family::Sir ? "SIR-SIR" : "SIR-SAVE";
      dir_name = cell->cell.family == Stage2Family::Sir ? "SIR" : "SAVE";
    }
    os << rows[r].first << '\t' << percent_label(rows[r].second) << '\t' << two_name;
    for (const auto& v : two) os << '\t' << v;
    os << '\n' << rows[r].first << '\t' << percent_label(rows[r].second) << '\t' << dir_name;
    for (const auto& v : dir) os << '\t' << v;
    os << '\n';
  }
  return os.str();
}

json table_json(const TableReport& report, const SimulationConfig& config) {
  json out = provenance(config);
  json cells = json::array();
  json timing = json::array();
  for (const auto& r : report.cells) {
    json failures = json::object();
    for (const auto& [kind, count] : r.failures_by_kind) failures[kind] = count;
    cells.push_back({{"label", r.cell.label},
                     {"t", r.t},
                     {"d", r.d},
                     {"d_g", r.d_g},
                     {"two_stage", method_json(r.two_stage)},
                     {"direct", method_json(r.direct)},
                     {"reps", r.cell.reps},
                     {"succeeded", r.succeeded},
                     {"failed", r.failed},
                     {"failures", failures},
                     {"flagged", r.flagged},
                     {"censoring_rate", r.censoring_rate},
                     {"warnings", r.warnings}});
    timing.push_back({{"label", r.cell.label}, {"seconds", r.elapsed_seconds}});
  }
  out["quantiles"] = quantiles_json(report);
  out["cells"] = cells;
  out["flagged_cells"] = report.flagged_cells;
  out["timing"] = timing;
  return out;
}

std::string intro_tsv(const IntroReport& report) {
  std::ostringstream os;
  os << "branch\tcoordinate\tmean\tsd\n";
  for (const DirectionSummary* s : {&report.full, &report.induced})
    for (std::size_t k = 0; k < s->mean.size(); ++k)
      os << s->branch << '\t' << k + 1 << '\t' << fixed3(s->mean[k]) << '\t' << fixed3(s->sd[k]) << '\n';
  return os.str();
}

json intro_json(const IntroReport& report, const SimulationConfig& config) {
  json out = provenance(config);
  auto branch = [](const DirectionSummary& s) {
    return json{{"branch", s.branch}, {"mean", s.mean}, {"sd", s.sd}, {"succeeded", s.succeeded}, {"failed", s.failed}};
  };
  out["intro"] = {{"t50", report.t},
                  {"n", report.n},
                  {"reps", report.reps},
                  {"h", report.h},
                  {"full", branch(report.full)},
                  {"induced", branch(report.induced)}};
  return out;
}

}  // namespace tsdr
