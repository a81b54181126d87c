// qpathnet command-line front end.
//
//   qpathnet run <config.json | preset:NAME> [OUT_DIR] [--mode M] [--seed S] ...
//   qpathnet report SUMMARY.json... [--out DIR]
//   qpathnet export NAME [--out FILE]
//   qpathnet verify [NAME...]
//   qpathnet presets

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qpathnet/config.h"
#include "qpathnet/errors.h"
#include "qpathnet/io.h"
#include "qpathnet/report.h"
#include "qpathnet/runner.h"
#include "qpathnet/scenarios.h"

namespace {

using namespace qpathnet;

int cmd_verify(std::vector<std::string> names) {
  if (names.empty()) names = preset_names();
  bool ok = true;
  for (const auto& name : names) {
    const auto report = verify_preset(preset_by_name(name));
    fmt::print("{}\n", report.preset);
    for (const auto& e : report.entries) {
      fmt::print("  {:<4} {:<26} expected {:<16} computed {:<16} delta {:<12} allowed {:<12} [{}; {}]\n",
                 e.pass ? "ok" : "FAIL", e.name, format_number(e.expected), format_number(e.computed),
                 format_number(e.delta), format_number(e.allowed), to_string(e.tolerance_class), e.derivation);
    }
    ok = ok && report.all_pass();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual-path measurement simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a scenario file or preset:NAME");
  std::string source;
  std::string out_pos;
  std::string out_opt;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_step;
  std::optional<double> grid_extent;
  std::optional<std::size_t> trials;
  run_cmd->add_option("source", source, "Scenario JSON file, or preset:NAME")->required();
  run_cmd->add_option("out_dir", out_pos, "Output directory");
  run_cmd->add_option("--out", out_opt, "Output directory (overrides the positional one)");
  run_cmd->add_option("--mode", mode, "exact | sweep | sample | classical");
  run_cmd->add_option("--seed", seed, "RNG seed for sample mode");
  run_cmd->add_option("--grid-step", grid_step, "Pointer grid spacing, in reading units");
  run_cmd->add_option("--grid-extent", grid_extent, "Grid margin past the outermost value, in reading units");
  run_cmd->add_option("--trials", trials, "Number of Monte-Carlo trials");

  auto* report_cmd = app.add_subcommand("report", "Tabulate run summaries and write plot CSVs");
  std::vector<std::string> summary_files;
  std::string report_out;
  report_cmd->add_option("summaries", summary_files, "summary.json files")->required();
  report_cmd->add_option("--out", report_out, "Directory for report.txt and plot CSVs");

  auto* export_cmd = app.add_subcommand("export", "Print a preset as an editable scenario document");
  std::string export_name;
  std::string export_out;
  export_cmd->add_option("preset", export_name, "Preset name")->required();
  export_cmd->add_option("--out", export_out, "Write to this file instead of stdout");

  auto* verify_cmd = app.add_subcommand("verify", "Check presets against their expected values");
  std::vector<std::string> verify_names;
  verify_cmd->add_option("presets", verify_names, "Preset names (default: all)");

  auto* presets_cmd = app.add_subcommand("presets", "List built-in presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      RunOverrides o;
      if (!mode.empty()) o.mode = parse_run_mode(mode);
      o.seed = seed;
      o.grid_step = grid_step;
      o.grid_extent = grid_extent;
      o.trials = trials;
      const std::string out = !out_opt.empty() ? out_opt : (!out_pos.empty() ? out_pos : std::string("qpathnet-out"));
      const auto outcome = run(source, out, o);
      if (outcome.exit_code == kExitOk) {
        fmt::print("{}\n", outcome.message);
      } else {
        fmt::print(stderr, "{}\n", outcome.message);
      }
      return outcome.exit_code;
    }
    if (*report_cmd) {
      std::vector<std::filesystem::path> files(summary_files.begin(), summary_files.end());
      std::string table, message;
      const int code = report(files, report_out, table, message);
      if (code == 0) {
        fmt::print("{}", table);
        if (!message.empty()) fmt::print("{}\n", message);
      } else {
        fmt::print(stderr, "{}\n", message);
      }
      return code;
    }
    if (*export_cmd) {
      const std::string text = to_json(config_from_preset(preset_by_name(export_name))).dump(2) + "\n";
      if (export_out.empty()) {
        fmt::print("{}", text);
      } else {
        write_text_file(export_out, text);
      }
      return 0;
    }
    if (*verify_cmd) return cmd_verify(verify_names);
    if (*presets_cmd) {
      for (const auto& n : preset_names()) fmt::print("{}\n", n);
      return 0;
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitEngine;
  }
  return 0;
}
