#include "qpathnet/runner.h"

#include <sstream>

#include <fmt/format.h>

#include "qpathnet/errors.h"
#include "qpathnet/io.h"
#include "qpathnet/scenarios.h"

namespace qpathnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

json bins_json(const std::vector<StrongBin>& bins) {
  json out = json::array();
  for (const auto& b : bins) out.push_back({{"value", b.value}, {"probability", b.probability}});
  return out;
}

fs::path emit(const fs::path& dir, const std::string& name, const std::string& text, std::vector<fs::path>& artifacts) {
  const fs::path p = dir / name;
  write_text_file(p, text);
  artifacts.push_back(p);
  return p;
}

std::vector<PointerDistribution> reading_marginals(const ScenarioConfig& c, const std::vector<PointerGrid>& grids) {
  if (c.meters.size() == 1) return {reading_distribution(c.chain, c.meters[0], grids[0])};
  const auto joint = joint_reading_distribution(c.chain, c.meters, grids);
  std::vector<PointerDistribution> out;
  for (std::size_t a = 0; a < joint.axes(); ++a) out.push_back(marginal(joint, a));
  return out;
}

double complete_set_probability(const ScenarioConfig& c, const std::vector<PointerGrid>& grids) {
  double total = 0.0;
  if (c.meters.size() == 1) {
    for (const auto& d : branch_reading_distributions(c.chain, c.meters[0], grids[0])) total += d.norm;
  } else {
    for (const auto& d : branch_joint_distributions(c.chain, c.meters, grids)) total += d.norm;
  }
  return total;
}

json header(const ScenarioConfig& c) {
  return {{"name", c.name},
          {"mode", to_string(c.run.mode)},
          {"dim", c.chain.dim()},
          {"steps", c.chain.step_count()},
          {"paths", c.chain.path_count()}};
}

json run_exact(const ScenarioConfig& c, const fs::path& dir, std::vector<fs::path>& artifacts) {
  const auto& chain = c.chain;
  const auto grids = default_grids(chain, c.meters, c.run.grid);
  const auto dists = reading_marginals(c, grids);

  json summary = header(c);
  summary["transition_amplitude"] = complex_json(transition_amplitude(chain));
  summary["total_probability"] = complete_set_probability(c, grids);
  json meters = json::array();
  json marginals = json::array();
  for (std::size_t i = 0; i < c.meters.size(); ++i) {
    const auto& m = c.meters[i];
    const auto dist = amplitude_distribution(chain, m.functional);
    json rel = json::array();
    for (const auto& r : relative_amplitudes(dist)) rel.push_back({{"value", r.value}, {"alpha", complex_json(r.alpha)}});
    const Complex wv = weak_value(dist);
    const double mean = mean_reading(dists[i]);
    marginals.push_back(mean);
    meters.push_back({{"functional", c.meter_functionals[i]},
                      {"profile", {{"shape", to_string(m.profile.shape())}, {"width", m.profile.width()}}},
                      {"support", dist.support},
                      {"strong_bins", bins_json(strong_limit_bins(dist))},
                      {"strong_mean", strong_mean(dist)},
                      {"weak_value", complex_json(wv)},
                      {"relative_amplitudes", rel},
                      {"mean_reading", mean},
                      {"norm", dists[i].norm},
                      {"distribution", distribution_json(dists[i])}});
    std::ostringstream csv;
    write_distribution_csv(csv, dists[i]);
    emit(dir, fmt::format("distribution_{}.csv", i + 1), csv.str(), artifacts);
  }
  summary["strong_mean"] = meters[0]["strong_mean"];
  summary["weak_value_re"] = meters[0]["weak_value"][0];
  summary["weak_value_im"] = meters[0]["weak_value"][1];
  summary["norm"] = meters[0]["norm"];
  summary["weak_marginals"] = marginals;
  summary["meters"] = meters;
  return summary;
}

json run_sweep(const ScenarioConfig& c, const fs::path& dir, std::vector<fs::path>& artifacts) {
  const auto& m = c.meters.front();
  std::vector<double> widths = c.run.widths;
  if (widths.empty()) {
    for (double scale : {1.0, 10.0, 100.0, 1000.0}) widths.push_back(m.profile.width() * scale);
  }
  const auto report = weak_limit_report(c.chain, m.functional, widths, m.profile, c.run.grid);

  std::string csv = "width,mean,abs_error\n";
  json rows = json::array();
  for (const auto& r : report.rows) {
    csv += fmt::format("{},{},{}\n", format_number(r.width), format_number(r.mean), format_number(r.error));
    rows.push_back({{"width", r.width}, {"mean", r.mean}, {"abs_error", r.error}});
  }
  emit(dir, "sweep.csv", csv, artifacts);

  json summary = header(c);
  summary["functional"] = c.meter_functionals.front();
  summary["shape"] = to_string(m.profile.shape());
  summary["weak_value_re"] = report.weak_value.real();
  summary["weak_value_im"] = report.weak_value.imag();
  summary["rows"] = rows;
  summary["error_decreasing"] = report.monotone;
  summary["final_error"] = report.final_error;
  summary["final_relative_error"] =
      report.limit != 0.0 ? json(report.final_error / std::abs(report.limit)) : json(nullptr);
  return summary;
}

json run_sample(const ScenarioConfig& c, const fs::path& dir, std::vector<fs::path>& artifacts) {
  const auto grids = default_grids(c.chain, c.meters, c.run.grid);
  const TrialSampler sampler(c.chain, c.meters, grids);
  const auto result = sampler.sample(c.run.trials, c.run.seed);

  std::ostringstream csv;
  write_trials_csv(csv, result.trials);
  emit(dir, "trials.csv", csv.str(), artifacts);

  json summary = header(c);
  const json s = summary_json(result.summary);
  for (auto it = s.begin(); it != s.end(); ++it) summary[it.key()] = it.value();
  summary["branch_probabilities"] = sampler.branch_probabilities();
  if (result.summary.accepted > 0) {
    const auto dists = reading_marginals(c, grids);
    for (std::size_t i = 0; i < c.meters.size(); ++i) {
      const double exact = mean_reading(dists[i]);
      const auto& em = result.summary.meters[i];
      summary["meters"][i]["functional"] = c.meter_functionals[i];
      summary["meters"][i]["exact_mean"] = exact;
      summary["meters"][i]["z_score"] =
          em.standard_error > 0.0 ? json((em.mean - exact) / em.standard_error) : json(nullptr);
    }
  }
  return summary;
}

struct ClassicalSetup {
  ClassicalNetwork network;
  std::vector<double> values;  // per path
  std::vector<std::string> condition;
  bool comparator;
};

ClassicalSetup classical_setup(const ScenarioConfig& c) {
  if (c.classical) {
    if (c.classical->depth_weights.empty()) throw ConfigError("classical.functional.depth_weights is required");
    if (c.classical->condition.empty()) throw ConfigError("classical.condition must name at least one receptacle");
    const auto f = hop_value_combination(c.classical->depth_weights);
    std::vector<double> values;
    for (const auto& p : classical_paths(c.classical->network)) values.push_back(f(c.classical->network, p));
    return {c.classical->network, std::move(values), c.classical->condition, false};
  }
  if (c.chain.dim() != 2 || c.chain.step_count() != 2) {
    throw ConfigError("classical mode needs a classical section, or a two-level chain with two steps");
  }
  ClassicalNetwork network = classical_comparator(c.chain);
  const auto& f = c.meters.front().functional;
  std::vector<double> values;
  for (const auto& p : classical_paths(network)) {
    // Hops: in -> a_i -> b_j; connector labels carry the eigen-indices.
    const VirtualPath vp{{p.hops[1].connector == "a1" ? 0u : 1u, p.hops[2].connector == "b1" ? 0u : 1u}};
    values.push_back(f(c.chain, vp));
  }
  return {network, std::move(values), {"f1"}, true};
}

json run_classical(const ScenarioConfig& c, const fs::path& dir, std::vector<fs::path>& artifacts) {
  const auto setup = classical_setup(c);
  const auto paths = classical_paths(setup.network);

  std::string csv = "path,hops,receptacle,probability,value\n";
  double total = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::string hops;
    for (const auto& h : paths[i].hops) {
      if (!hops.empty()) hops += '|';
      hops += fmt::format("{}:{}>{}", h.connector, h.inlet, h.outlet);
    }
    csv += fmt::format("{},{},{},{},{}\n", i + 1, hops, paths[i].receptacle, format_number(paths[i].probability),
                       format_number(setup.values[i]));
    total += paths[i].probability;
  }
  emit(dir, "paths.csv", csv, artifacts);

  // Conditional distribution of the path values, grouped like strong bins.
  std::vector<double> vals;
  std::vector<Complex> probs;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (const auto& r : setup.condition) {
      if (paths[i].receptacle == r) {
        vals.push_back(setup.values[i]);
        probs.push_back(paths[i].probability);
      }
    }
  }
  const auto grouped = group_amplitudes(vals, probs);
  json bins = json::array();
  for (std::size_t m = 0; m < grouped.size(); ++m) {
    bins.push_back({{"value", grouped.support[m]}, {"probability", grouped.amplitudes[m].real()}});
  }

  json summary = header(c);
  summary["comparator"] = setup.comparator;
  summary["path_count"] = paths.size();
  summary["total_probability"] = total;
  summary["condition"] = setup.condition;
  summary["classical_mean"] = classical_mean(paths, setup.values, setup.condition);
  summary["classical_bins"] = bins;
  if (setup.comparator) {
    const auto& f = c.meters.front().functional;
    summary["quantum_strong_mean"] = strong_mean(c.chain, f);
    summary["quantum_strong_bins"] = bins_json(strong_limit_bins(c.chain, f));
  }
  return summary;
}

}  // namespace

void apply_overrides(ScenarioConfig& config, const RunOverrides& o) {
  if (o.mode) config.run.mode = *o.mode;
  if (o.seed) config.run.seed = *o.seed;
  if (o.trials) {
    if (*o.trials == 0) throw ConfigError("--trials must be at least 1");
    config.run.trials = *o.trials;
  }
  if (o.grid_step) {
    if (!(*o.grid_step > 0.0)) throw ConfigError("--grid-step must be positive");
    config.run.grid.step = *o.grid_step;
  }
  if (o.grid_extent) {
    if (!(*o.grid_extent >= 0.0)) throw ConfigError("--grid-extent must be non-negative");
    config.run.grid.extent = *o.grid_extent;
  }
}

RunResult run_scenario(const ScenarioConfig& config, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));

  RunResult result;
  switch (config.run.mode) {
    case RunMode::kExact:
      result.summary = run_exact(config, out_dir, result.artifacts);
      break;
    case RunMode::kSweep:
      result.summary = run_sweep(config, out_dir, result.artifacts);
      break;
    case RunMode::kSample:
      result.summary = run_sample(config, out_dir, result.artifacts);
      break;
    case RunMode::kClassical:
      result.summary = run_classical(config, out_dir, result.artifacts);
      break;
  }
  emit(out_dir, "summary.json", result.summary.dump(2) + "\n", result.artifacts);
  return result;
}

RunOutcome run(const std::string& source, const fs::path& out_dir, const RunOverrides& overrides) {
  RunOutcome outcome;
  try {
    ScenarioConfig config = resolve_config(source);
    apply_overrides(config, overrides);
    outcome.result = run_scenario(config, out_dir);
    outcome.message = fmt::format("wrote {} files to {}", outcome.result.artifacts.size(), out_dir.string());
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = fmt::format("config error: {}", e.what());
  } catch (const Error& e) {
    outcome.exit_code = kExitEngine;
    outcome.message = fmt::format("engine error: {}", e.what());
  }
  return outcome;
}

}  // namespace qpathnet
