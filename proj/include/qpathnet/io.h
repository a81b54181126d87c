#pragma once

// Text serialization of distributions and trial records. Numbers are written
// with '.' as the decimal separator whatever the process locale is.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpathnet/meter.h"
#include "qpathnet/network.h"

namespace qpathnet {

// 12 significant digits, shortest form ("%.12g").
std::string format_number(double v);

void write_distribution_csv(std::ostream& out, const PointerDistribution& p);
nlohmann::json distribution_json(const PointerDistribution& p);
PointerDistribution distribution_from_json(const nlohmann::json& j);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials);
nlohmann::json summary_json(const SampleSummary& s);

void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace qpathnet
