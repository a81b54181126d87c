#pragma once

// Virtual paths of a pre- and post-selected measurement chain, their
// amplitudes, and functionals defined on them.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qpathnet/core.h"

namespace qpathnet {

inline constexpr std::size_t kMaxPaths = 1'000'000;
inline constexpr double kDefaultMergeTol = 1e-9;
// |<phi|U(T)|psi>| at or below this is treated as a forbidden transition.
inline constexpr double kForbiddenThreshold = 1e-14;

struct ChainStep {
  double time;
  Observable observable;
};

// |psi> prepared at t = 0, observables coupled at 0 < t_1 < ... < t_K < T,
// post-selection on |phi> at T. When post-selection fails the system is
// found in one of the completion states.
class MeasurementChain {
 public:
  MeasurementChain(StateVector pre_state, std::vector<ChainStep> steps, Propagator propagator,
                   double final_time, StateVector post_state,
                   std::optional<std::vector<StateVector>> post_complement = std::nullopt);

  std::size_t dim() const { return pre_.dim(); }
  std::size_t step_count() const { return steps_.size(); }
  std::size_t path_count() const { return path_count_; }
  const StateVector& pre_state() const { return pre_; }
  const StateVector& post_state() const { return post_; }
  const std::vector<ChainStep>& steps() const { return steps_; }
  const ChainStep& step(std::size_t k) const { return steps_.at(k); }
  const Propagator& propagator() const { return prop_; }
  double final_time() const { return final_time_; }

  // Orthonormal completion of the post-selected state: explicit if one was
  // supplied, otherwise derived from a Householder QR of [phi | I].
  const std::vector<StateVector>& completion() const { return completion_; }
  bool has_explicit_completion() const { return explicit_completion_; }

  // Same chain, post-selected on another final state.
  MeasurementChain with_post_state(const StateVector& post) const;

 private:
  StateVector pre_;
  std::vector<ChainStep> steps_;
  Propagator prop_;
  double final_time_;
  StateVector post_;
  std::vector<StateVector> completion_;
  bool explicit_completion_ = false;
  std::size_t path_count_ = 1;
};

// One eigen-index per step, 0-based.
struct VirtualPath {
  std::vector<std::size_t> indices;

  bool operator==(const VirtualPath&) const = default;
};

// Position of a path in lexicographic enumeration order.
std::size_t path_rank(const MeasurementChain& chain, const VirtualPath& path);
VirtualPath path_at_rank(const MeasurementChain& chain, std::size_t rank);

std::vector<VirtualPath> enumerate_paths(const MeasurementChain& chain);

Complex path_amplitude(const MeasurementChain& chain, const VirtualPath& path);
// All amplitudes in enumeration order.
std::vector<Complex> path_amplitudes(const MeasurementChain& chain, std::size_t threads = 0);
// <phi|U(T)|psi>, computed directly rather than by summing paths.
Complex transition_amplitude(const MeasurementChain& chain);

struct StepWeight {
  std::size_t step;
  double weight;
};

// A real value assigned to every virtual path of a chain.
class PathFunctional {
 public:
  enum class Kind { kLinear, kIndicator, kTable };

  static PathFunctional eigenvalue_at_step(std::size_t step);
  // offset + sum_k w_k * (eigenvalue taken at step k)
  static PathFunctional linear_combination(std::vector<StepWeight> terms, double offset = 0.0);
  static PathFunctional constant(double value);
  // 1 on the given path, 0 elsewhere.
  static PathFunctional indicator_of_path(VirtualPath path);
  // Values indexed by path rank.
  static PathFunctional table(std::vector<double> values);

  Kind kind() const { return kind_; }
  const std::vector<StepWeight>& terms() const { return terms_; }
  double offset() const { return offset_; }
  const VirtualPath& indicated_path() const { return indicated_; }
  const std::vector<double>& table_values() const { return table_; }

  // Throws InvalidArgument unless the functional is total on the chain's paths.
  void validate(const MeasurementChain& chain) const;
  double operator()(const MeasurementChain& chain, const VirtualPath& path) const;
  std::vector<double> values(const MeasurementChain& chain) const;

 private:
  Kind kind_ = Kind::kLinear;
  std::vector<StepWeight> terms_;
  double offset_ = 0.0;
  VirtualPath indicated_;
  std::vector<double> table_;
};

// Delta comb of grouped path amplitudes: support[m] carries amplitudes[m].
struct AmplitudeDistribution {
  std::vector<double> support;
  std::vector<Complex> amplitudes;

  std::size_t size() const { return support.size(); }
  Complex total() const;
};

// Groups paths whose values lie within merge_tol of the group's smallest
// value; amplitudes are summed in path order.
AmplitudeDistribution group_amplitudes(std::span<const double> values,
                                       std::span<const Complex> amplitudes,
                                       double merge_tol = kDefaultMergeTol);

AmplitudeDistribution amplitude_distribution(const MeasurementChain& chain,
                                             const PathFunctional& functional,
                                             double merge_tol = kDefaultMergeTol);

// A path or weighted combination of paths of one chain. The functional value
// is nullopt when the bundle mixes paths on which it differs.
class PathBundle {
 public:
  static PathBundle of(const MeasurementChain& chain, const PathFunctional& functional,
                       const VirtualPath& path);

  Complex amplitude() const { return amplitude_; }
  std::optional<double> value() const { return value_; }
  bool determinate() const { return value_.has_value(); }
  const MeasurementChain* chain() const { return chain_; }

 private:
  friend PathBundle combine_paths(Complex, const PathBundle&, Complex, const PathBundle&, double);
  PathBundle(const MeasurementChain* chain, Complex amplitude, std::optional<double> value)
      : chain_(chain), amplitude_(amplitude), value_(value) {}

  const MeasurementChain* chain_;
  Complex amplitude_;
  std::optional<double> value_;
};

PathBundle combine_paths(Complex alpha, const PathBundle& p, Complex beta, const PathBundle& q,
                         double merge_tol = kDefaultMergeTol);

struct RelativeAmplitude {
  double value;
  Complex alpha;
};

std::vector<RelativeAmplitude> relative_amplitudes(const AmplitudeDistribution& dist);
std::vector<RelativeAmplitude> relative_amplitudes(const MeasurementChain& chain,
                                                   const PathFunctional& functional);

// sum f A(f) / sum A(f)
Complex weak_value(const AmplitudeDistribution& dist);
Complex weak_value(const MeasurementChain& chain, const PathFunctional& functional);

// sum f |A(f)|^2 / sum |A(f)|^2, grouping before squaring.
double strong_mean(const AmplitudeDistribution& dist);
double strong_mean(const MeasurementChain& chain, const PathFunctional& functional);

}  // namespace qpathnet
