#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsdr/harness.hpp"

namespace tsdr {

inline constexpr const char* kToolName = "tsdr";
inline constexpr const char* kToolVersion = "0.1.0";

struct IntroConfig {
  std::uint64_t seed = 1;
  std::size_t reps = 500;
  std::size_t n = 300;
  int h = 10;
};

// Everything that determines a simulation's numbers. Thread count is not
// part of it: results do not depend on scheduling.
struct SimulationConfig {
  std::string preset = "custom";
  std::uint64_t seed = 0;
  std::size_t quantile_draws = kQuantileDraws;
  std::uint64_t quantile_seed = kQuantileSeed;
  std::vector<CellSpec> cells;
  std::optional<IntroConfig> intro;
};

nlohmann::json to_json(const CellSpec& cell);
CellSpec cell_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimulationConfig& config);
// Accepts a bare config object or an emitted report (its "config" member is used).
// Unknown keys are rejected.
SimulationConfig simulation_config_from_json(const nlohmann::json& j);

std::string to_string(Group0Normalization g);
std::string to_string(CensoringWeightAt w);

// Tool, version, RNG identifier, seed, conventions and the resolved config.
nlohmann::json provenance(const SimulationConfig& config);

// Means pivoted into one row per (model, t, method), one column per (n, p, CR).
std::string table_tsv(const TableReport& report);
nlohmann::json table_json(const TableReport& report, const SimulationConfig& config);

std::string intro_tsv(const IntroReport& report);
nlohmann::json intro_json(const IntroReport& report, const SimulationConfig& config);

}  // namespace tsdr
