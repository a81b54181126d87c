#pragma once

// Scenario documents: a JSON description of a chain, its meters and what to
// run. Complex numbers are [re, im] pairs; a bare number is a real value.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpathnet/meter.h"
#include "qpathnet/network.h"

namespace qpathnet {

struct ScenarioPreset;

// Raised for malformed or invalid scenario documents. The message names the
// offending field, e.g. "observable not Hermitian at steps[0]".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { kExact, kSweep, kSample, kClassical };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

struct RunSettings {
  RunMode mode = RunMode::kExact;
  GridOptions grid;
  std::size_t trials = 100'000;
  std::uint64_t seed = 1;
  std::vector<double> widths;  // sweep widths; empty means meter width x {1, 10, 100, 1000}
};

struct NamedFunctional {
  std::string name;
  PathFunctional functional;
};

struct ClassicalSettings {
  ClassicalNetwork network;
  std::vector<std::pair<std::size_t, double>> depth_weights;
  std::vector<std::string> condition;
};

struct ScenarioConfig {
  std::string name;
  MeasurementChain chain;
  std::vector<NamedFunctional> functionals;
  std::vector<std::string> meter_functionals;  // functional name per meter
  std::vector<MeterSpec> meters;
  RunSettings run;
  std::optional<ClassicalSettings> classical;
};

ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& config);

ScenarioConfig config_from_preset(const ScenarioPreset& preset);

// "preset:<name>" or a path to a scenario document.
ScenarioConfig resolve_config(const std::string& source);

}  // namespace qpathnet
