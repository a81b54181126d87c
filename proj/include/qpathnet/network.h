#pragma once

// Sampling of measurement records from exact reading densities, and the
// classical ball-and-connector network used as a comparator.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qpathnet/meter.h"

namespace qpathnet {

// ---------------------------------------------------------------------------
// Quantum stochastic network

struct TrialRecord {
  std::uint64_t trial_id;
  std::vector<double> readings;  // one per meter, always a grid node
  std::size_t branch;            // 0: post-selection succeeded; m >= 1: completion state m - 1

  bool postselected() const { return branch == 0; }
};

struct MeterSummary {
  double mean = 0.0;
  double std_dev = 0.0;
  double standard_error = 0.0;
};

struct SampleSummary {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t accepted = 0;
  std::vector<std::size_t> branch_counts;
  std::vector<MeterSummary> meters;  // over post-selected trials only
};

struct SampleResult {
  std::vector<TrialRecord> trials;
  SampleSummary summary;
};

// Inverse-CDF sampler over the discretized joint (branch, readings)
// distribution. Each trial draws from its own Philox stream keyed by
// (seed, trial id), so records do not depend on the thread count.
class TrialSampler {
 public:
  TrialSampler(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
               const std::vector<PointerGrid>& grids, std::size_t threads = 0);

  std::size_t branches() const { return branches_; }
  double total_probability() const { return cdf_.back(); }
  // Exact probability of each final-state branch under the discretization.
  std::vector<double> branch_probabilities() const;

  TrialRecord draw(std::uint64_t seed, std::uint64_t trial_id) const;
  SampleResult sample(std::size_t n, std::uint64_t seed, std::size_t threads = 0) const;

 private:
  std::vector<PointerGrid> grids_;
  std::size_t branches_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> cdf_;
};

SampleResult sample_trials(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
                           const std::vector<PointerGrid>& grids, std::size_t n, std::uint64_t seed,
                           std::size_t threads = 0);

SampleSummary summarize(const std::vector<TrialRecord>& trials, std::size_t meters, std::size_t branches,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Classical comparator

struct Outlet {
  enum class Kind { kConnector, kReceptacle, kBlocked };

  Kind kind = Kind::kBlocked;
  std::string target;     // connector or receptacle label
  std::size_t inlet = 0;  // inlet of the target connector

  static Outlet to_connector(std::string label, std::size_t inlet) {
    return {Kind::kConnector, std::move(label), inlet};
  }
  static Outlet to_receptacle(std::string label) { return {Kind::kReceptacle, std::move(label), 0}; }
  static Outlet blocked() { return {}; }
};

// Two inlets, two outlets; w[i][j] is the probability to leave by outlet i
// having entered by inlet j.
struct ClassicalConnector {
  std::string label;
  std::array<std::array<double, 2>, 2> w{};
  std::array<Outlet, 2> outlets;
  double value = 0.0;

  // w with the blocked-outlet rule applied: a ball whose other outlet is
  // blocked leaves through the open one with probability 1.
  double transition(std::size_t outlet, std::size_t inlet) const;
};

class ClassicalNetwork {
 public:
  ClassicalNetwork(std::vector<ClassicalConnector> connectors, std::string entry, std::size_t entry_inlet = 0);

  const std::vector<ClassicalConnector>& connectors() const { return connectors_; }
  const ClassicalConnector& connector(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;
  const std::string& entry() const { return entry_; }
  std::size_t entry_inlet() const { return entry_inlet_; }

 private:
  std::vector<ClassicalConnector> connectors_;
  std::string entry_;
  std::size_t entry_inlet_;
};

struct Hop {
  std::string connector;
  std::size_t inlet;
  std::size_t outlet;
};

struct ClassicalPath {
  std::vector<Hop> hops;
  std::string receptacle;
  double probability;
};

// Source-to-receptacle paths with non-zero probability, outlet 0 explored first.
std::vector<ClassicalPath> classical_paths(const ClassicalNetwork& network);

using ClassicalFunctional = std::function<double(const ClassicalNetwork&, const ClassicalPath&)>;

// sum_k weight_k * value(connector visited at hop depth_k)
ClassicalFunctional hop_value_combination(std::vector<std::pair<std::size_t, double>> depth_weights);

// Mean of F over the paths that end in one of the `condition` receptacles.
double classical_mean(const std::vector<ClassicalPath>& paths, const std::vector<double>& values,
                      const std::vector<std::string>& condition);
double classical_mean(const ClassicalNetwork& network, const ClassicalFunctional& functional,
                      const std::vector<std::string>& condition);

struct ClassicalSample {
  std::vector<ClassicalPath> paths;
  std::vector<std::size_t> counts;  // aligned with paths
  std::size_t trials = 0;

  double frequency(std::size_t i) const { return static_cast<double>(counts[i]) / static_cast<double>(trials); }
};

ClassicalSample classical_sample(const ClassicalNetwork& network, std::size_t n, std::uint64_t seed,
                                 std::size_t threads = 0);

}  // namespace qpathnet
