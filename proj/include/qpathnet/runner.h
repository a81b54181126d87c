#pragma once

// Executes a scenario and writes its artifacts. Exit codes: 0 success,
// 2 invalid scenario document or option, 3 engine error.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpathnet/config.h"

namespace qpathnet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEngine = 3;

struct RunOverrides {
  std::optional<RunMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_step;    // absolute, in reading units
  std::optional<double> grid_extent;  // absolute, in reading units
  std::optional<std::size_t> trials;
};

void apply_overrides(ScenarioConfig& config, const RunOverrides& overrides);

struct RunResult {
  nlohmann::json summary;
  std::vector<std::filesystem::path> artifacts;
};

// Throws ConfigError or Error; writes into out_dir (created if missing).
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  RunResult result;
};

// source: "preset:<name>" or a scenario file path.
RunOutcome run(const std::string& source, const std::filesystem::path& out_dir, const RunOverrides& overrides = {});

}  // namespace qpathnet
