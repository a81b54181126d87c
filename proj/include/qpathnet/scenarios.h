#pragma once

// Ready-made chains for the standard worked examples, each carrying the
// numbers the engine is expected to reproduce.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpathnet/meter.h"
#include "qpathnet/network.h"

namespace qpathnet {

enum class ToleranceClass { kAnalytic, kQuadrature, kSweepLimit, kMonteCarlo };

std::string to_string(ToleranceClass c);

struct Measured {
  double value;
  double standard_error = 0.0;  // Monte-Carlo entries only
};

struct ScenarioPreset;

struct ExpectedValue {
  std::string name;
  double expected;
  ToleranceClass tolerance_class;
  std::string derivation;  // where the expected number comes from
  std::optional<double> tolerance;  // overrides the class default
  std::function<Measured(const ScenarioPreset&)> compute;
};

struct ScenarioPreset {
  std::string name;
  MeasurementChain chain;
  std::vector<MeterSpec> meters;
  std::vector<double> widths;  // weak-limit sweep; meters use widths.back()
  std::vector<ExpectedValue> expected;
  std::uint64_t seed = 1;
  std::size_t trials = 100'000;
};

struct Tolerances {
  double analytic = 1e-9;
  double quadrature = 1e-6;
  double sweep_relative = 0.05;
  double mc_sigmas = 3.0;
};

struct VerificationEntry {
  std::string name;
  ToleranceClass tolerance_class;
  std::string derivation;
  double expected;
  double computed;
  double delta;
  double allowed;
  bool pass;
};

struct VerificationReport {
  std::string preset;
  std::vector<VerificationEntry> entries;

  bool all_pass() const;
};

VerificationReport verify_preset(const ScenarioPreset& preset, const Tolerances& tolerances = {});

// K = 1 chain measuring the projector |1><1| (eigenvalues 1, 0) with H = 0.
ScenarioPreset build_projector_postselected(const StateVector& psi, const StateVector& phi,
                                            std::vector<double> widths);

// One pointer coupled to -A at t1 and +B at t2, i.e. the functional
// F = b(step 2) - a(step 1). H = 0, T = 2 t2 - t1.
ScenarioPreset build_difference_meter(const StateVector& psi, const StateVector& phi, const Observable& a,
                                      const Observable& b, double t1, double t2, std::vector<double> widths,
                                      ProfileShape shape = ProfileShape::kGaussian);

// dim = 3, path amplitudes (C, -C, C), two weak meters on the path-1 and
// path-3 indicators. |C| is fixed at 1/3 by normalization; only arg C is used.
ScenarioPreset build_three_box(Complex c = Complex(1.0 / 3.0, 0.0), double width = 1e3);

// Projector chain whose path amplitudes stand in the ratio A[2]/A[1] = -1.01.
ScenarioPreset build_minus_hundred(std::vector<double> widths = {10.0, 1e2, 1e3, 1e4});

std::vector<std::string> preset_names();
ScenarioPreset preset_by_name(const std::string& name);

// Closed-form mean reading of a Gaussian pointer over a delta comb:
// sum Re(A_m A_n*) (f_m + f_n)/2 e_mn / sum Re(A_m A_n*) e_mn,
// e_mn = exp(-(f_m - f_n)^2 / (8 width^2)).
double gaussian_mean_closed_form(const AmplitudeDistribution& dist, double width);

// Two-stage connector network: "in" feeds a1/a2, which feed b1/b2, which
// empty into receptacles f1/f2. Outlet and inlet numbering is 0-based.
ClassicalNetwork two_stage_network(const std::array<std::array<double, 2>, 2>& w_in,
                                   const std::array<std::array<double, 2>, 2>& w_a1,
                                   const std::array<std::array<double, 2>, 2>& w_a2,
                                   const std::array<std::array<double, 2>, 2>& w_b1,
                                   const std::array<std::array<double, 2>, 2>& w_b2,
                                   const std::array<double, 4>& values = {-1.0, 1.0, -1.0, 1.0});

// Classical network whose f1 paths carry probabilities |A[i]|^2 of a dim-2,
// two-step chain: what accurate meters at both steps would produce if the
// paths were classical alternatives.
ClassicalNetwork classical_comparator(const MeasurementChain& chain);

}  // namespace qpathnet
