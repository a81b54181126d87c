#include "qpathnet/network.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "qpathnet/errors.h"
#include "qpathnet/parallel.h"
#include "qpathnet/philox.h"

namespace qpathnet {

namespace {

double cell_weight(const std::vector<PointerGrid>& grids, std::size_t flat) {
  double w = 1.0;
  for (std::size_t r = grids.size(); r-- > 0;) {
    const std::size_t i = flat % grids[r].count;
    flat /= grids[r].count;
    w *= (i == 0 || i + 1 == grids[r].count) ? 0.5 * grids[r].step : grids[r].step;
  }
  return w;
}

}  // namespace

TrialSampler::TrialSampler(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
                           const std::vector<PointerGrid>& grids, std::size_t threads)
    : grids_(grids) {
  const auto joints = branch_joint_distributions(chain, meters, grids, threads);
  branches_ = joints.size();
  cells_ = joints.front().density.size();
  cdf_.reserve(branches_ * cells_);
  double acc = 0.0;
  for (const auto& j : joints) {
    for (std::size_t c = 0; c < cells_; ++c) {
      acc += j.density[c] * cell_weight(grids_, c);
      cdf_.push_back(acc);
    }
  }
  if (!(acc > 0.0)) throw ZeroProbability("no reading has non-zero probability");
}

std::vector<double> TrialSampler::branch_probabilities() const {
  std::vector<double> out;
  double prev = 0.0;
  for (std::size_t b = 0; b < branches_; ++b) {
    const double end = cdf_[(b + 1) * cells_ - 1];
    out.push_back((end - prev) / cdf_.back());
    prev = end;
  }
  return out;
}

TrialRecord TrialSampler::draw(std::uint64_t seed, std::uint64_t trial_id) const {
  TrialStream rng(seed, trial_id);
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  auto idx = static_cast<std::size_t>(it - cdf_.begin());
  TrialRecord rec{trial_id, std::vector<double>(grids_.size()), idx / cells_};
  std::size_t flat = idx % cells_;
  for (std::size_t r = grids_.size(); r-- > 0;) {
    rec.readings[r] = grids_[r].at(flat % grids_[r].count);
    flat /= grids_[r].count;
  }
  return rec;
}

SampleResult TrialSampler::sample(std::size_t n, std::uint64_t seed, std::size_t threads) const {
  if (n == 0) throw InvalidArgument("number of trials must be >= 1");
  SampleResult result;
  result.trials.resize(n);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) result.trials[t] = draw(seed, t);
      },
      threads);
  result.summary = summarize(result.trials, grids_.size(), branches_, seed);
  return result;
}

SampleResult sample_trials(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
                           const std::vector<PointerGrid>& grids, std::size_t n, std::uint64_t seed,
                           std::size_t threads) {
  return TrialSampler(chain, meters, grids, threads).sample(n, seed, threads);
}

SampleSummary summarize(const std::vector<TrialRecord>& trials, std::size_t meters, std::size_t branches,
                        std::uint64_t seed) {
  SampleSummary s;
  s.seed = seed;
  s.trials = trials.size();
  s.branch_counts.assign(branches, 0);
  s.meters.assign(meters, {});
  for (const auto& t : trials) {
    ++s.branch_counts.at(t.branch);
    if (!t.postselected()) continue;
    ++s.accepted;
    for (std::size_t r = 0; r < meters; ++r) s.meters[r].mean += t.readings[r];
  }
  if (s.accepted == 0) return s;
  const auto n = static_cast<double>(s.accepted);
  for (auto& m : s.meters) m.mean /= n;
  if (s.accepted < 2) return s;
  for (const auto& t : trials) {
    if (!t.postselected()) continue;
    for (std::size_t r = 0; r < meters; ++r) {
      const double d = t.readings[r] - s.meters[r].mean;
      s.meters[r].std_dev += d * d;
    }
  }
  for (auto& m : s.meters) {
    m.std_dev = std::sqrt(m.std_dev / (n - 1.0));
    m.standard_error = m.std_dev / std::sqrt(n);
  }
  return s;
}

double ClassicalConnector::transition(std::size_t outlet, std::size_t inlet) const {
  const bool blocked0 = outlets[0].kind == Outlet::Kind::kBlocked;
  const bool blocked1 = outlets[1].kind == Outlet::Kind::kBlocked;
  if (blocked0 != blocked1) {
    const std::size_t open = blocked0 ? 1 : 0;
    return outlet == open ? 1.0 : 0.0;
  }
  return w.at(outlet).at(inlet);
}

ClassicalNetwork::ClassicalNetwork(std::vector<ClassicalConnector> connectors, std::string entry,
                                   std::size_t entry_inlet)
    : connectors_(std::move(connectors)), entry_(std::move(entry)), entry_inlet_(entry_inlet) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < connectors_.size(); ++i) {
    if (!index.emplace(connectors_[i].label, i).second) {
      throw InvalidArgument(fmt::format("duplicate connector label '{}'", connectors_[i].label));
    }
  }
  if (!index.count(entry_)) throw InvalidArgument(fmt::format("entry connector '{}' not found", entry_));
  if (entry_inlet_ > 1) throw InvalidArgument("entry inlet must be 0 or 1");

  std::map<std::pair<std::size_t, std::size_t>, int> wired;
  wired[{index.at(entry_), entry_inlet_}] = 1;
  for (const auto& c : connectors_) {
    for (std::size_t j = 0; j < 2; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        if (!(c.w[i][j] >= 0.0)) {
          throw InvalidArgument(fmt::format("connector '{}': w({}|{}) is negative", c.label, i + 1, j + 1));
        }
        col += c.w[i][j];
      }
      if (std::abs(col - 1.0) > 1e-12) {
        throw InvalidArgument(fmt::format("connector '{}': column for inlet {} sums to {}", c.label, j + 1, col));
      }
    }
    if (c.outlets[0].kind == Outlet::Kind::kBlocked && c.outlets[1].kind == Outlet::Kind::kBlocked) {
      throw InvalidArgument(fmt::format("connector '{}' has both outlets blocked", c.label));
    }
    for (const auto& o : c.outlets) {
      if (o.kind != Outlet::Kind::kConnector) continue;
      auto it = index.find(o.target);
      if (it == index.end()) {
        throw InvalidArgument(fmt::format("connector '{}' wired to unknown connector '{}'", c.label, o.target));
      }
      if (o.inlet > 1) throw InvalidArgument(fmt::format("connector '{}': inlet index must be 0 or 1", c.label));
      if (++wired[{it->second, o.inlet}] > 1) {
        throw InvalidArgument(fmt::format("inlet {} of connector '{}' is wired more than once", o.inlet + 1, o.target));
      }
    }
  }

  // Depth-first cycle detection over connector-to-connector tubes.
  std::vector<int> state(connectors_.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    state[v] = 1;
    for (const auto& o : connectors_[v].outlets) {
      if (o.kind != Outlet::Kind::kConnector) continue;
      const std::size_t u = index.at(o.target);
      if (state[u] == 1) throw InvalidArgument(fmt::format("network wiring has a cycle through '{}'", o.target));
      if (state[u] == 0) visit(u);
    }
    state[v] = 2;
  };
  for (std::size_t v = 0; v < connectors_.size(); ++v) {
    if (state[v] == 0) visit(v);
  }
}

std::size_t ClassicalNetwork::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < connectors_.size(); ++i) {
    if (connectors_[i].label == label) return i;
  }
  throw InvalidArgument(fmt::format("unknown connector '{}'", label));
}

const ClassicalConnector& ClassicalNetwork::connector(const std::string& label) const {
  return connectors_[index_of(label)];
}

std::vector<ClassicalPath> classical_paths(const ClassicalNetwork& network) {
  std::vector<ClassicalPath> out;
  std::vector<Hop> hops;
  std::function<void(const std::string&, std::size_t, double)> walk = [&](const std::string& label,
                                                                          std::size_t inlet, double p) {
    const auto& c = network.connector(label);
    for (std::size_t o = 0; o < 2; ++o) {
      const double w = c.transition(o, inlet);
      if (w == 0.0) continue;
      hops.push_back({label, inlet, o});
      const auto& dest = c.outlets[o];
      if (dest.kind == Outlet::Kind::kReceptacle) {
        out.push_back({hops, dest.target, p * w});
      } else if (dest.kind == Outlet::Kind::kConnector) {
        walk(dest.target, dest.inlet, p * w);
      }
      hops.pop_back();
    }
  };
  walk(network.entry(), network.entry_inlet(), 1.0);
  return out;
}

ClassicalFunctional hop_value_combination(std::vector<std::pair<std::size_t, double>> depth_weights) {
  return [terms = std::move(depth_weights)](const ClassicalNetwork& net, const ClassicalPath& path) {
    double v = 0.0;
    for (const auto& [depth, weight] : terms) {
      if (depth >= path.hops.size()) {
        throw InvalidArgument(fmt::format("path has no hop at depth {}", depth));
      }
      v += weight * net.connector(path.hops[depth].connector).value;
    }
    return v;
  };
}

double classical_mean(const std::vector<ClassicalPath>& paths, const std::vector<double>& values,
                      const std::vector<std::string>& condition) {
  if (paths.size() != values.size()) throw DimensionMismatch("one functional value per path is required");
  if (condition.empty()) throw InvalidArgument("condition must name at least one receptacle");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (std::find(condition.begin(), condition.end(), paths[i].receptacle) == condition.end()) continue;
    num += paths[i].probability * values[i];
    den += paths[i].probability;
  }
  if (!(den > 0.0)) throw ZeroProbability("conditioning receptacles are never reached");
  return num / den;
}

double classical_mean(const ClassicalNetwork& network, const ClassicalFunctional& functional,
                      const std::vector<std::string>& condition) {
  const auto paths = classical_paths(network);
  std::vector<double> values;
  for (const auto& p : paths) values.push_back(functional(network, p));
  return classical_mean(paths, values, condition);
}

ClassicalSample classical_sample(const ClassicalNetwork& network, std::size_t n, std::uint64_t seed,
                                 std::size_t threads) {
  if (n == 0) throw InvalidArgument("number of trials must be >= 1");
  ClassicalSample s;
  s.paths = classical_paths(network);
  s.trials = n;
  std::map<std::vector<std::size_t>, std::size_t> by_route;
  for (std::size_t i = 0; i < s.paths.size(); ++i) {
    std::vector<std::size_t> route;
    for (const auto& h : s.paths[i].hops) route.push_back(h.outlet);
    by_route[route] = i;
  }

  std::vector<std::size_t> landed(n);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> route;
        for (std::size_t t = begin; t < end; ++t) {
          TrialStream rng(seed, t);
          route.clear();
          const ClassicalConnector* c = &network.connector(network.entry());
          std::size_t inlet = network.entry_inlet();
          while (true) {
            const std::size_t o = rng.uniform() < c->transition(0, inlet) ? 0 : 1;
            route.push_back(o);
            const Outlet& dest = c->outlets[o];
            if (dest.kind != Outlet::Kind::kConnector) break;
            c = &network.connector(dest.target);
            inlet = dest.inlet;
          }
          landed[t] = by_route.at(route);
        }
      },
      threads);
  s.counts.assign(s.paths.size(), 0);
  for (std::size_t i : landed) ++s.counts[i];
  return s;
}

}  // namespace qpathnet
