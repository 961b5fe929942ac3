#include "tsdr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tsdr/csv.hpp"
#include "tsdr/error.hpp"
#include "tsdr/estimator.hpp"
#include "tsdr/harness.hpp"
#include "tsdr/report.hpp"

namespace tsdr {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Thrown for bad flags or inputs detected by the CLI itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::TooFewRows:
    case ErrorKind::EmptyData:
    case ErrorKind::MissingStatus:
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidMatrix:
    case ErrorKind::ModelMisconfigured:
      return kExitUsage;
    default:
      return kExitCompute;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

DataSet load_csv(const std::string& path, const CsvOptions& opts = {}) {
  if (!fs::exists(path)) throw UsageError("input file '" + path + "' does not exist");
  return parse_csv(path, opts);
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string input;
  std::string output;
  std::string method = "sir-sir";
  std::string t;
  std::size_t d = 0;
  std::size_t d_g = 0;
  bool merc = false;
  std::size_t d_star = 5;
  int h = 10;
  int h0 = 5;
  int h1 = 10;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::string format = "tsv";
  std::string group0 = "risk-set";
};

// Smallest observed time whose estimated CDF reaches percent%.
double resolve_threshold(const std::string& spec, const DataSet& data) {
  if (spec.rfind("q:", 0) == 0) {
    double a = 0.0;
    try {
      std::size_t used = 0;
      a = std::stod(spec.substr(2), &used);
      if (used != spec.size() - 2) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("--t: cannot read percent in '" + spec + "'");
    }
    if (!(a > 0.0 && a < 100.0)) throw UsageError("--t: percent must lie in (0, 100)");
    if (!data.censored()) {
      Vector y = data.y;
      std::sort(y.begin(), y.end());
      auto k = static_cast<std::size_t>(std::ceil(a / 100.0 * static_cast<double>(y.size())));
      return y[std::clamp<std::size_t>(k, 1, y.size()) - 1];
    }
    const SurvivalCurve km = kaplan_meier(data.y, *data.status);
    for (std::size_t k = 0; k < km.jump_times().size(); ++k)
      if (1.0 - km.values()[k] >= a / 100.0 - 1e-12) return km.jump_times()[k];
    throw Error(ErrorKind::ThresholdTooLate, "Kaplan-Meier curve never reaches " + spec.substr(2) + "%");
  }
  try {
    std::size_t used = 0;
    const double t = std::stod(spec, &used);
    if (used != spec.size()) throw std::invalid_argument("trailing");
    return t;
  } catch (const std::exception&) {
    throw UsageError("--t: expected a number or q:<percent>, got '" + spec + "'");
  }
}

struct MethodPair {
  SdrMethod stage1;
  SdrMethod stage2;
  bool two_stage = true;
};

MethodPair resolve_methods(const FitArgs& a, const DataSet& data, double t) {
  MethodPair m;
  const bool save = a.method == "sir-save" || a.method == "save";
  m.two_stage = a.method == "sir-sir" || a.method == "sir-save";
  if (data.censored()) {
    m.stage1 = SdrMethod::sir_double_slice(a.h0, a.h1);
    m.stage2 = save ? SdrMethod::save_binary_censored(t) : SdrMethod::sir_binary_censored(t);
    m.stage2.censoring.group0 =
        a.group0 == "km" ? Group0Normalization::KaplanMeier : Group0Normalization::RiskSetCount;
  } else {
    m.stage1 = SdrMethod::sir(a.h);
    const InducedResponse g = InducedResponse::threshold(t);
    m.stage2 = save ? SdrMethod::save_binary(g) : SdrMethod::sir_binary(g);
  }
  return m;
}

void check_dimension_flags(const FitArgs& a, std::size_t p, bool two_stage) {
  if (a.merc) {
    if (a.d || a.d_g) throw UsageError("--merc cannot be combined with --d or --dg");
    if (a.d_star < 1) throw UsageError("--dstar must be at least 1");
    return;
  }
  if (a.d_g == 0) throw UsageError("--dg is required unless --merc is given");
  if (two_stage) {
    if (a.d == 0) throw UsageError("two-stage methods need --d (or --merc)");
    if (a.d_g > a.d) throw UsageError("--dg must not exceed --d");
    if (a.d > p) throw UsageError("--d exceeds the number of covariates");
  } else {
    if (a.d) throw UsageError("--d applies only to two-stage methods");
    if (a.d_g > p) throw UsageError("--dg exceeds the number of covariates");
  }
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.begin(), v.end())); }

json fit_json(const FitArgs& a, const DataSet& data, double t, const FitResult& fit, const MercFit* merc) {
  json rows = json::array();
  for (std::size_t i = 0; i < fit.gamma_hat.rows(); ++i) {
    const auto r = fit.gamma_hat.row(i);
    rows.push_back({{"covariate", data.covariate_names[i]}, {"loadings", std::vector<double>(r.begin(), r.end())}});
  }
  const Diagnostics& dg = fit.diagnostics;
  json out = {{"tool", kToolName},
              {"version", kToolVersion},
              {"rng", kRngAlgorithm},
              {"seed", a.seed},
              {"config",
               {{"input", a.input},
                {"method", a.method},
                {"t", a.t},
                {"d", a.d},
                {"d_g", a.d_g},
                {"merc", a.merc},
                {"d_star", a.d_star},
                {"h", a.h},
                {"h0", a.h0},
                {"h1", a.h1},
                {"standardize_columns", a.standardize},
                {"group0_normalization", a.group0}}},
              {"n", data.n()},
              {"p", data.p()},
              {"censored", data.censored()},
              {"threshold", t},
              {"d", fit.d},
              {"d_g", fit.d_g},
              {"gamma_hat", rows},
              {"eigenvalues", vector_json(fit.eigenvalues)},
              {"diagnostics",
               {{"stage1_slice_counts", dg.stage1_slice_counts},
                {"stage2_slice_counts", dg.stage2_slice_counts},
                {"stage1_eigenvalues", vector_json(dg.stage1_eigenvalues)},
                {"kernel_eigenvalues", vector_json(dg.kernel_eigenvalues)},
                {"projected_eigenvalues", vector_json(dg.projected_eigenvalues)},
                {"captured_fraction", dg.captured_fraction},
                {"degenerate_projection", dg.degenerate_projection},
                {"tie_at_cut", dg.tie_at_cut},
                {"warnings", dg.warnings}}}};
  if (merc) {
    out["merc"] = {{"stage1_ratios", vector_json(merc->stage1.ratios)}, {"induced_ratios", vector_json(merc->induced.ratios)}};
  }
  return out;
}

std::string fit_tsv(const DataSet& data, double t, const FitResult& fit) {
  std::ostringstream os;
  os << "# n=" << data.n() << " p=" << data.p() << " censored=" << (data.censored() ? "yes" : "no")
     << " t=" << format_number(t) << " d=" << fit.d << " d_g=" << fit.d_g << '\n';
  os << "covariate";
  for (std::size_t k = 0; k < fit.gamma_hat.cols(); ++k) os << "\tdirection" << k + 1;
  os << '\n';
  for (std::size_t i = 0; i < fit.gamma_hat.rows(); ++i) {
    os << data.covariate_names[i];
    for (std::size_t k = 0; k < fit.gamma_hat.cols(); ++k) os << '\t' << format_number(fit.gamma_hat(i, k));
    os << '\n';
  }
  os << "# eigenvalues\n";
  for (std::size_t k = 0; k < fit.eigenvalues.size(); ++k)
    os << "eigenvalue" << k + 1 << '\t' << format_number(fit.eigenvalues[k]) << '\n';
  os << "# captured_fraction\t" << format_number(fit.diagnostics.captured_fraction) << '\n';
  for (const auto& w : fit.diagnostics.warnings) os << "# warning\t" << w << '\n';
  return os.str();
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  DataSet data = load_csv(a.input);
  if (a.standardize) standardize_columns(data);
  const bool two_stage = a.method == "sir-sir" || a.method == "sir-save";
  check_dimension_flags(a, data.p(), two_stage);
  const double t = resolve_threshold(a.t, data);
  const MethodPair m = resolve_methods(a, data, t);

  FitResult fit;
  std::optional<MercFit> merc;
  if (a.merc) {
    merc = two_stage ? fit_two_stage_merc(data, m.stage1, m.stage2, a.d_star) : fit_direct_merc(data, m.stage2, a.d_star);
    fit = merc->fit;
    if (!two_stage) fit.d = 0;
  } else {
    fit = two_stage ? fit_two_stage(data, m.stage1, m.stage2, a.d, a.d_g) : fit_direct(data, m.stage2, a.d_g);
  }
  for (const auto& w : fit.diagnostics.warnings) err << "warning: " << w << '\n';
  const std::string text =
      a.format == "json" ? fit_json(a, data, t, fit, merc ? &*merc : nullptr).dump(2) + "\n" : fit_tsv(data, t, fit);
  write_output(text, a.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string preset;
  std::string config;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> quantile_draws;
  int jobs = 1;
  std::string output_dir;
  std::string name;
  bool quiet = false;
};

SimulationConfig build_config(const SimulateArgs& a) {
  SimulationConfig c;
  const std::uint64_t seed = a.seed.value_or(1);
  const std::size_t reps = a.reps.value_or(500);
  if (a.preset == "custom") {
    if (a.config.empty()) throw UsageError("--preset custom needs --config <file>");
    if (!fs::exists(a.config)) throw UsageError("config file '" + a.config + "' does not exist");
    std::ifstream f(a.config);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigError, a.config + ": " + e.what());
    }
    c = simulation_config_from_json(j);
    if (a.reps) {
      for (auto& cell : c.cells) cell.reps = *a.reps;
      if (c.intro) c.intro->reps = *a.reps;
    }
    if (a.seed) {
      c.seed = *a.seed;
      for (std::size_t k = 0; k < c.cells.size(); ++k) c.cells[k].seed = derive_seed(*a.seed, k);
      if (c.intro) c.intro->seed = *a.seed;
    }
  } else {
    if (!a.config.empty()) throw UsageError("--config is only used with --preset custom");
    c.preset = a.preset;
    c.seed = seed;
    if (a.preset == "table1-model4") c.cells = table1_model4_cells(reps, seed);
    else if (a.preset == "table1-model5") c.cells = table1_model5_cells(reps, seed);
    else c.intro = IntroConfig{seed, reps, 300, 10};
  }
  if (a.quantile_draws) {
    if (*a.quantile_draws == 0) throw UsageError("--quantile-draws must be positive");
    c.quantile_draws = *a.quantile_draws;
  }
  if ((a.reps && *a.reps == 0)) throw UsageError("--reps must be at least 1");
  return c;
}

fs::path output_directory(const SimulateArgs& a) {
  if (!a.output_dir.empty()) return a.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path.string() + "'");
  f << text;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.jobs < 1) throw UsageError("--jobs must be at least 1");
  const SimulationConfig config = build_config(a);
  const fs::path dir = output_directory(a);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir.string() + "'");
  const std::string stem = a.name.empty() ? config.preset : a.name;

  std::string tsv;
  json report;
  bool flagged = false;
  if (!config.cells.empty()) {
    const TableReport table = run_table(config.cells, a.jobs, config.quantile_draws, config.quantile_seed);
    tsv = table_tsv(table);
    report = table_json(table, config);
    flagged = table.flagged_cells > 0;
    if (flagged) err << "warning: " << table.flagged_cells << " cell(s) had more than 5% failed replications\n";
  }
  if (config.intro) {
    const IntroReport intro = run_intro_scenario(config.intro->seed, config.intro->reps, config.intro->n,
                                                 config.intro->h, a.jobs, config.quantile_draws);
    tsv += intro_tsv(intro);
    const json ij = intro_json(intro, config);
    if (report.is_null()) report = ij;
    else report["intro"] = ij.at("intro");
  }
  write_file(dir / (stem + ".tsv"), tsv);
  write_file(dir / (stem + ".json"), report.dump(2) + "\n");
  if (!a.quiet) out << tsv;
  err << "wrote " << (dir / (stem + ".tsv")).string() << " and " << (dir / (stem + ".json")).string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- km

struct KmArgs {
  std::string input;
  std::string output;
};

int cmd_km(const KmArgs& a, std::ostream& out) {
  const DataSet data = load_csv(a.input, CsvOptions{.require_covariates = false});
  if (!data.status) throw Error(ErrorKind::MissingStatus, a.input + ": a 'status' column is required");
  const SurvivalCurve km = kaplan_meier(data.y, *data.status);
  std::ostringstream os;
  os << "time\tat_risk\tevents\tcensored\tsurvival\n";
  for (std::size_t k = 0; k < km.jump_times().size(); ++k) {
    const double t = km.jump_times()[k];
    std::size_t at_risk = 0, events = 0, censored = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      at_risk += data.y[i] >= t;
      if (data.y[i] == t) ((*data.status)[i] ? events : censored) += 1;
    }
    os << format_number(t) << '\t' << at_risk << '\t' << events << '\t' << censored << '\t'
       << format_number(km.values()[k]) << '\n';
  }
  write_output(os.str(), a.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string model = "intro-gamma";
  std::string config;
  std::size_t n = 100;
  std::size_t p = 10;
  bool censored = false;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  ModelSpec spec;
  if (a.model == "intro-gamma") {
    if (a.censored) throw UsageError("intro-gamma has no censoring law");
    spec = intro_gamma_model();
  } else if (a.model == "lognormal-ratio") {
    spec = lognormal_ratio_model(a.p, a.censored);
  } else if (a.model == "piecewise-hazard") {
    spec = piecewise_hazard_model(a.p, a.censored);
  } else {
    if (a.config.empty()) throw UsageError("--model custom needs --config <file>");
    if (!fs::exists(a.config)) throw UsageError("config file '" + a.config + "' does not exist");
    std::ifstream f(a.config);
    try {
      spec = json::parse(f).get<ModelSpec>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigError, a.config + ": " + e.what());
    }
  }
  if (a.n < 1) throw UsageError("--n must be at least 1");
  Rng rng(a.seed);
  Simulated sim = generate(spec, a.n, rng);
  for (std::size_t j = 0; j < sim.data.p(); ++j) sim.data.covariate_names.push_back("x" + std::to_string(j + 1));
  std::ostringstream os;
  write_csv(os, sim.data);
  write_output(os.str(), a.output, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage sufficient dimension reduction for induced responses", "tsdr"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Estimate the induced-response subspace of a CSV data set");
  fit->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  fit->add_option("--input,-i", fa.input, "CSV with column y, optional status, covariates")->required();
  fit->add_option("--output,-o", fa.output, "Output file (default stdout)");
  fit->add_option("--method", fa.method)->check(CLI::IsMember({"sir-sir", "sir-save", "sir", "save"}))->capture_default_str();
  fit->add_option("--t", fa.t, "Threshold: a number, or q:<percent> for a quantile of Y")->required();
  fit->add_option("--d", fa.d, "Stage-1 dimension");
  fit->add_option("--dg", fa.d_g, "Induced-response dimension");
  fit->add_flag("--merc", fa.merc, "Choose dimensions by the maximal eigenvalue ratio");
  fit->add_option("--dstar", fa.d_star, "Upper search bound for --merc")->capture_default_str();
  fit->add_option("--h", fa.h, "Slices for stage-1 SIR")->capture_default_str();
  fit->add_option("--h0", fa.h0, "Slices in the censored stratum")->capture_default_str();
  fit->add_option("--h1", fa.h1, "Slices in the event stratum")->capture_default_str();
  fit->add_option("--seed", fa.seed, "Recorded in the report; estimation is deterministic");
  fit->add_flag("--standardize-columns", fa.standardize, "Divide each covariate by its sample sd");
  fit->add_option("--format", fa.format)->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();
  fit->add_option("--group0", fa.group0, "Censored group-0 second-moment normalization")
      ->check(CLI::IsMember({"risk-set", "km"}))
      ->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo preset or a custom cell list");
  sim->add_option("--preset", sa.preset)
      ->required()
      ->check(CLI::IsMember({"table1-model4", "table1-model5", "intro-gamma", "custom"}));
  sim->add_option("--config", sa.config, "JSON config (or an emitted report) for --preset custom");
  sim->add_option("--reps", sa.reps, "Replications per cell");
  sim->add_option("--seed", sa.seed, "Master seed");
  sim->add_option("--quantile-draws", sa.quantile_draws, "Draws used for response quantiles");
  sim->add_option("--jobs,-j", sa.jobs, "Worker threads")->capture_default_str();
  sim->add_option("--output-dir", sa.output_dir, std::string("Report directory (default $") + kOutputDirEnv + " or .)");
  sim->add_option("--name", sa.name, "File stem for the reports (default: preset name)");
  sim->add_flag("--quiet,-q", sa.quiet, "Do not echo the TSV to stdout");

  KmArgs ka;
  auto* km = app.add_subcommand("km", "Kaplan-Meier curve of (y, status)");
  km->add_option("--input,-i", ka.input)->required();
  km->add_option("--output,-o", ka.output, "Output file (default stdout)");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a simulated data set as CSV");
  gen->add_option("--model", ga.model)
      ->check(CLI::IsMember({"intro-gamma", "lognormal-ratio", "piecewise-hazard", "custom"}))
      ->capture_default_str();
  gen->add_option("--config", ga.config, "Model JSON for --model custom");
  gen->add_option("--n", ga.n)->capture_default_str();
  gen->add_option("--p", ga.p)->capture_default_str();
  gen->add_flag("--censored", ga.censored, "Apply the model's censoring law");
  gen->add_option("--seed", ga.seed)->capture_default_str();
  gen->add_option("--output,-o", ga.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit) return cmd_fit(fa, out, err);
    if (*sim) return cmd_simulate(sa, out, err);
    if (*km) return cmd_km(ka, out);
    return cmd_generate(ga, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCompute;
  }
}

}  // namespace tsdr
