#pragma once

// Consolidates run summaries into a text table and plot-ready CSV files.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qpathnet {

struct ReportOutput {
  std::string table;
  // (file name, CSV text): xi,density for exact runs, width,mean for sweeps.
  std::vector<std::pair<std::string, std::string>> plots;
};

// Throws ConfigError on malformed summaries or mixed system dimensions.
ReportOutput build_report(const std::vector<nlohmann::json>& summaries);

// Reads summary files, prints the table to `table_out` and writes plot CSVs
// into out_dir when it is non-empty. Returns a process exit code.
int report(const std::vector<std::filesystem::path>& files, const std::filesystem::path& out_dir,
           std::string& table_out, std::string& message);

}  // namespace qpathnet
