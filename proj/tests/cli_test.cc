#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qpathnet/config.h"
#include "qpathnet/io.h"
#include "qpathnet/report.h"
#include "qpathnet/runner.h"
#include "qpathnet/scenarios.h"

namespace {

using namespace qpathnet;
using nlohmann::json;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / "qpathnet_cli_test" / (std::string(info->name()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json spin_document() {
  return json::parse(R"({
    "name": "spin",
    "system": {"dim": 2},
    "pre_state": [1, 0],
    "post_state": [0.6, 0.8],
    "final_time": 1.0,
    "steps": [{"time": 0.5, "matrix": [[0, 1], [1, 0]]}],
    "functionals": [{"name": "X", "kind": "eigenvalue", "step": 0}],
    "meters": [{"functional": "X", "profile": {"shape": "gaussian", "width": 0.5}}],
    "run": {"mode": "exact"}
  })");
}

fs::path write_doc(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "scenario.json";
  write_text_file(p, doc.dump(2));
  return p;
}

TEST(Config, ParsesSpinDocument) {
  const auto c = parse_config(spin_document());
  EXPECT_EQ(c.name, "spin");
  EXPECT_EQ(c.chain.step_count(), 1u);
  EXPECT_EQ(c.meters.size(), 1u);
  EXPECT_EQ(c.run.mode, RunMode::kExact);
  EXPECT_NEAR(c.chain.post_state().norm_squared(), 1.0, 1e-15);
}

TEST(Config, NonHermitianObservableNamesField) {
  auto doc = spin_document();
  doc["steps"][0]["matrix"] = json::parse("[[0, 1], [2, 0]]");
  try {
    parse_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "observable not Hermitian at steps[0]");
  }
  const auto dir = scratch("out");
  const auto outcome = run(write_doc(dir, doc).string(), dir / "run");
  EXPECT_EQ(outcome.exit_code, kExitConfig);
  EXPECT_NE(outcome.message.find("steps[0]"), std::string::npos);
}

TEST(Config, OtherMalformedDocuments) {
  const std::vector<std::pair<std::string, json>> edits{
      {"/system/dim", 3},
      {"/meters/0/functional", "nope"},
      {"/run/mode", "fast"},
      {"/meters/0/profile/width", -1.0},
      {"/steps/0/time", 2.0},
  };
  for (const auto& [ptr, value] : edits) {
    auto doc = spin_document();
    doc[json::json_pointer(ptr)] = value;
    EXPECT_THROW(parse_config(doc), ConfigError) << ptr;
  }
  auto doc = spin_document();
  doc.erase("pre_state");
  EXPECT_THROW(parse_config(doc), ConfigError);
  EXPECT_THROW(resolve_config("preset:unknown"), ConfigError);
  EXPECT_THROW(resolve_config("/nonexistent/scenario.json"), ConfigError);
}

TEST(Run, ThreeBoxWeakMarginals) {
  const auto outcome = run("preset:three-box", scratch("out"));
  ASSERT_EQ(outcome.exit_code, kExitOk) << outcome.message;
  const auto& m = outcome.result.summary.at("weak_marginals");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0].get<double>(), 1.0, 1e-3);
  EXPECT_NEAR(m[1].get<double>(), 1.0, 1e-3);
}

TEST(Run, MinusHundredSweep) {
  RunOverrides o;
  o.mode = RunMode::kSweep;
  const auto dir = scratch("out");
  const auto outcome = run("preset:minus-hundred", dir, o);
  ASSERT_EQ(outcome.exit_code, kExitOk) << outcome.message;
  const auto& rows = outcome.result.summary.at("rows");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(rows.back().at("mean").get<double>(), -100.0, 5.0);
  EXPECT_TRUE(outcome.result.summary.at("error_decreasing").get<bool>());
  std::ifstream csv(dir / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "width,mean,abs_error");
}

TEST(Run, ExportedPresetRunsBitExactly) {
  for (const auto& name : preset_names()) {
    const auto direct = config_from_preset(preset_by_name(name));
    const json doc = to_json(direct);
    const auto reparsed = parse_config(json::parse(doc.dump()));
    const auto a = run_scenario(direct, scratch(name + "_a"));
    const auto b = run_scenario(reparsed, scratch(name + "_b"));
    EXPECT_EQ(a.summary, b.summary) << name;
  }
}

TEST(Run, ForbiddenTransitionIsEngineError) {
  auto doc = spin_document();
  doc["pre_state"] = json::parse("[1, 1]");
  doc["post_state"] = json::parse("[1, -1]");
  doc["steps"][0]["matrix"] = json::parse("[[1, 0], [0, 0]]");
  const auto dir = scratch("out");
  const auto outcome = run(write_doc(dir, doc).string(), dir / "run");
  EXPECT_EQ(outcome.exit_code, kExitEngine) << outcome.message;
}

TEST(Run, BadOverridesAreConfigErrors) {
  RunOverrides o;
  o.grid_step = -1.0;
  EXPECT_EQ(run("preset:projector", scratch("out"), o).exit_code, kExitConfig);
  RunOverrides t;
  t.trials = 0;
  t.mode = RunMode::kSample;
  EXPECT_EQ(run("preset:projector", scratch("out2"), t).exit_code, kExitConfig);
}

TEST(Run, SampleModeIsReproducible) {
  RunOverrides o;
  o.mode = RunMode::kSample;
  o.trials = 5000;
  o.seed = 42;
  const auto a = run("preset:projector", scratch("a"), o);
  const auto b = run("preset:projector", scratch("b"), o);
  ASSERT_EQ(a.exit_code, kExitOk) << a.message;
  EXPECT_EQ(a.result.summary, b.result.summary);
  const auto& m = a.result.summary.at("meters")[0];
  EXPECT_LT(std::abs(m.at("z_score").get<double>()), 4.0);
}

TEST(Run, ClassicalComparatorMode) {
  RunOverrides o;
  o.mode = RunMode::kClassical;
  const auto outcome = run("preset:difference", scratch("out"), o);
  ASSERT_EQ(outcome.exit_code, kExitOk) << outcome.message;
  const auto& s = outcome.result.summary;
  EXPECT_EQ(s.at("path_count").get<int>(), 8);
  EXPECT_NEAR(s.at("total_probability").get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(s.contains("quantum_strong_mean"));
}

TEST(Report, TablesAndPlots) {
  const auto exact = run("preset:projector", scratch("exact"));
  RunOverrides sweep_o;
  sweep_o.mode = RunMode::kSweep;
  const auto sweep = run("preset:minus-hundred", scratch("sweep"), sweep_o);
  RunOverrides sample_o;
  sample_o.mode = RunMode::kSample;
  sample_o.trials = 2000;
  const auto sample = run("preset:projector", scratch("sample"), sample_o);
  ASSERT_EQ(exact.exit_code, kExitOk);
  ASSERT_EQ(sweep.exit_code, kExitOk);
  ASSERT_EQ(sample.exit_code, kExitOk);

  const auto out = build_report({exact.result.summary, sweep.result.summary, sample.result.summary});
  for (const char* row : {"strong_mean", "weak_value_re", "weak_value_im", "norm"}) {
    EXPECT_NE(out.table.find(row), std::string::npos) << row;
  }
  EXPECT_NE(out.table.find("empirical vs exact"), std::string::npos);
  bool sweep_plot = false;
  for (const auto& [name, csv] : out.plots) {
    if (name.find("sweep") == std::string::npos) continue;
    sweep_plot = true;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "width,mean");
    int lines = 0;
    while (std::getline(in, line)) {
      ++lines;
      EXPECT_EQ(std::count(line.begin(), line.end(), ','), 1);
    }
    EXPECT_EQ(lines, 4);
  }
  EXPECT_TRUE(sweep_plot);

  // The sample z-score uses the exact run of the same scenario as reference.
  const double emp = sample.result.summary.at("meters")[0].at("mean").get<double>();
  const double se = sample.result.summary.at("meters")[0].at("standard_error").get<double>();
  const double ref = exact.result.summary.at("meters")[0].at("mean_reading").get<double>();
  EXPECT_NE(out.table.find(format_number((emp - ref) / se)), std::string::npos);
}

TEST(Report, RejectsMixedDimensions) {
  const auto two = run("preset:projector", scratch("two"));
  const auto three = run("preset:three-box", scratch("three"));
  EXPECT_THROW(build_report({two.result.summary, three.result.summary}), ConfigError);

  std::string table, message;
  const auto dir = scratch("files");
  write_text_file(dir / "a.json", two.result.summary.dump());
  write_text_file(dir / "b.json", three.result.summary.dump());
  EXPECT_EQ(report({dir / "a.json", dir / "b.json"}, dir / "out", table, message), kExitConfig);
  EXPECT_NE(message.find("mixed system dimensions"), std::string::npos);
  write_text_file(dir / "bad.json", "{not json");
  EXPECT_EQ(report({dir / "bad.json"}, dir / "out", table, message), kExitConfig);
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

TEST(Io, CsvIgnoresGlobalLocale) {
  const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  PointerDistribution p{PointerGrid::uniform(-0.5, 0.5, 0.25), {0.125, 1234.5, 0.5, 0.25, 1e-20}, 1.0};
  std::ostringstream out;
  write_distribution_csv(out, p);
  std::locale::global(saved);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "xi,density");
  std::getline(in, line);
  EXPECT_EQ(line, "-0.5,0.125");
  std::getline(in, line);
  EXPECT_EQ(line, "-0.25,1234.5");
  EXPECT_EQ(format_number(1e-20), "1e-20");
}

TEST(Io, DistributionJsonRoundTrip) {
  PointerDistribution p{PointerGrid::uniform(-1.0, 1.0, 0.5), {0.1, 0.2, 0.3, 0.2, 0.1}, 0.8};
  const auto q = distribution_from_json(json::parse(distribution_json(p).dump()));
  EXPECT_EQ(q.grid.count, p.grid.count);
  EXPECT_EQ(q.density, p.density);
  EXPECT_EQ(q.norm, p.norm);
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(QPATHNET_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch("bin");
  EXPECT_EQ(run_binary("presets"), 0);
  EXPECT_EQ(run_binary("run preset:projector --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "summary.json"));
  EXPECT_EQ(run_binary("run preset:nope --out " + (dir / "bad").string()), 2);
  auto doc = spin_document();
  doc["pre_state"] = json::parse("[1, 1]");
  doc["post_state"] = json::parse("[1, -1]");
  doc["steps"][0]["matrix"] = json::parse("[[1, 0], [0, 0]]");
  EXPECT_EQ(run_binary("run " + write_doc(dir, doc).string() + " --out " + (dir / "forbidden").string()), 3);
  EXPECT_EQ(run_binary("export three-box --out " + (dir / "tb.json").string()), 0);
  EXPECT_EQ(run_binary("run " + (dir / "tb.json").string() + " --out " + (dir / "tb").string()), 0);
  EXPECT_EQ(run_binary("report " + (dir / "ok" / "summary.json").string() + " --out " + (dir / "rep").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "rep" / "report.txt"));
  EXPECT_EQ(run_binary("verify projector"), 0);
}

}  // namespace
