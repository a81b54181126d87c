#include "qpathnet/io.h"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "qpathnet/errors.h"

namespace qpathnet {

std::string format_number(double v) { return fmt::format("{:.12g}", v); }

void write_distribution_csv(std::ostream& out, const PointerDistribution& p) {
  out << "xi,density\n";
  for (std::size_t i = 0; i < p.grid.count; ++i) {
    out << format_number(p.grid.at(i)) << ',' << format_number(p.density[i]) << '\n';
  }
}

nlohmann::json distribution_json(const PointerDistribution& p) {
  return {{"grid", {{"min", p.grid.min}, {"max", p.grid.max()}, {"step", p.grid.step}}},
          {"density", p.density},
          {"norm", p.norm}};
}

PointerDistribution distribution_from_json(const nlohmann::json& j) {
  PointerDistribution p;
  const auto& g = j.at("grid");
  p.density = j.at("density").get<std::vector<double>>();
  p.grid.min = g.at("min").get<double>();
  p.grid.step = g.at("step").get<double>();
  p.grid.count = p.density.size();
  p.norm = j.at("norm").get<double>();
  return p;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials) {
  const std::size_t meters = trials.empty() ? 0 : trials.front().readings.size();
  out << "trial_id";
  for (std::size_t m = 0; m < meters; ++m) out << fmt::format(",reading_{}", m + 1);
  out << ",branch\n";
  for (const auto& t : trials) {
    out << fmt::format("{}", t.trial_id);
    for (double r : t.readings) out << ',' << format_number(r);
    out << ',' << fmt::format("{}", t.branch) << '\n';
  }
}

nlohmann::json summary_json(const SampleSummary& s) {
  nlohmann::json meters = nlohmann::json::array();
  for (const auto& m : s.meters) {
    meters.push_back({{"mean", m.mean}, {"std_dev", m.std_dev}, {"standard_error", m.standard_error}});
  }
  return {{"seed", s.seed},
          {"trials", s.trials},
          {"accepted", s.accepted},
          {"branch_counts", s.branch_counts},
          {"meters", meters}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return nlohmann::json::parse(buf.str());
}

}  // namespace qpathnet
