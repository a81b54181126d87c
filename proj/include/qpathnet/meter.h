#pragma once

// von Neumann pointers: initial profiles, the final pointer state produced by
// a chain, reading densities and their strong and weak limits.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qpathnet/paths.h"

namespace qpathnet {

enum class ProfileShape { kGaussian, kRectangular, kTabulated };

// Real pointer wavefunction G(xi | width) = width^(-1/2) g(xi / width) with a
// unit-width base shape g normalized to int g^2 = 1.
//   Gaussian:    g(x) = (2 pi)^(-1/4) exp(-x^2 / 4), so G^2 is a normal density
//                of standard deviation `width`.
//   Rectangular: g(x) = 1 on |x| < 1/2. At the two edges g = 1/sqrt(2), which
//                makes trapezoid quadrature exact when edges sit on grid nodes.
//   Tabulated:   piecewise-linear interpolation of samples, zero outside.
class PointerProfile {
 public:
  static PointerProfile gaussian(double width);
  static PointerProfile rectangular(double width);
  static PointerProfile tabulated(std::vector<double> x, std::vector<double> g, double width);

  ProfileShape shape() const { return shape_; }
  double width() const { return width_; }
  const std::vector<double>& table_x() const { return table_x_; }
  const std::vector<double>& table_g() const { return table_g_; }

  double operator()(double xi) const;
  PointerProfile with_width(double width) const;

  // How far past the outermost shift the grid has to reach.
  double coverage_radius() const;
  // Default distance past the outermost shift for automatically built grids.
  double default_extent() const;

 private:
  double base(double x) const;

  ProfileShape shape_ = ProfileShape::kGaussian;
  double width_ = 1.0;
  std::vector<double> table_x_;
  std::vector<double> table_g_;
};

std::string to_string(ProfileShape shape);

struct PointerGrid {
  double min = 0.0;
  double step = 1.0;
  std::size_t count = 0;

  static PointerGrid uniform(double min, double max, double step);

  double max() const { return min + step * static_cast<double>(count - 1); }
  double at(std::size_t i) const { return min + step * static_cast<double>(i); }
};

struct GridOptions {
  std::optional<double> step;    // default width / 200
  std::optional<double> extent;  // default profile.default_extent()
};

// Grid from (min support - extent) to (max support + extent).
PointerGrid default_grid(double support_min, double support_max, const PointerProfile& profile,
                         const GridOptions& options = {});
PointerGrid default_grid(const AmplitudeDistribution& dist, const PointerProfile& profile,
                         const GridOptions& options = {});

// Composite trapezoid rule on a uniform grid.
double trapezoid(const PointerGrid& grid, const std::vector<double>& values);

struct PointerDistribution {
  PointerGrid grid;
  std::vector<double> density;
  double norm = 0.0;  // unnormalized total int P dxi
};

struct MeterSpec {
  PathFunctional functional;
  PointerProfile profile;
};

// M'(xi) = sum_m A(f_m) G(xi - f_m)
std::vector<Complex> final_pointer_state(const AmplitudeDistribution& dist, const PointerProfile& profile,
                                         const PointerGrid& grid);

PointerDistribution reading_distribution(const AmplitudeDistribution& dist, const PointerProfile& profile,
                                         const PointerGrid& grid);
PointerDistribution reading_distribution(const MeasurementChain& chain, const MeterSpec& meter,
                                         const PointerGrid& grid);

// Densities for every final state: index 0 is the post-selected state, then
// the completion states in order.
std::vector<PointerDistribution> branch_reading_distributions(const MeasurementChain& chain,
                                                              const MeterSpec& meter,
                                                              const PointerGrid& grid);
// Reading density with no post-selection (sum over all final states).
PointerDistribution unselected_reading_distribution(const MeasurementChain& chain, const MeterSpec& meter,
                                                    const PointerGrid& grid);

double mean_reading(const PointerDistribution& p);

// Unnormalized system state right after the (single) meter coupling, given
// reading xi0: sum_i G(xi0 - F[i]) <i|U(t_1)|psi> |i>.
StateVector conditional_state(const MeasurementChain& chain, const MeterSpec& meter, double xi0);

// Density over R pointer readings, row-major with the last axis fastest.
struct JointDistribution {
  std::vector<PointerGrid> grids;
  std::vector<double> density;
  double norm = 0.0;

  std::size_t axes() const { return grids.size(); }
  // Copy with the density zeroed where the reading on `axis` is outside [lo, hi].
  JointDistribution restricted(std::size_t axis, double lo, double hi) const;
};

JointDistribution joint_reading_distribution(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
                                             const std::vector<PointerGrid>& grids, std::size_t threads = 0);
// Densities per final state, as in branch_reading_distributions.
std::vector<JointDistribution> branch_joint_distributions(const MeasurementChain& chain,
                                                          const std::vector<MeterSpec>& meters,
                                                          const std::vector<PointerGrid>& grids,
                                                          std::size_t threads = 0);
PointerDistribution marginal(const JointDistribution& joint, std::size_t axis);

// Grid per meter covering that meter's functional values.
std::vector<PointerGrid> default_grids(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
                                       const GridOptions& options = {});

struct StrongBin {
  double value;
  double probability;  // |A(f)|^2, not normalized
};

std::vector<StrongBin> strong_limit_bins(const AmplitudeDistribution& dist);
std::vector<StrongBin> strong_limit_bins(const MeasurementChain& chain, const PathFunctional& functional);
// Bins divided by their total (conditioned on successful post-selection).
std::vector<StrongBin> normalized(std::vector<StrongBin> bins);

struct WeakLimitRow {
  double width;
  double mean;
  double error;  // |mean - Re weak value|
};

struct WeakLimitReport {
  std::vector<WeakLimitRow> rows;
  Complex weak_value;
  double limit = 0.0;  // Re weak value
  bool monotone = false;
  double final_error = 0.0;
};

// Mean reading for each (strictly increasing) width, using `profile` rescaled
// to that width, against the limit Re F-bar.
WeakLimitReport weak_limit_report(const AmplitudeDistribution& dist, const std::vector<double>& widths,
                                  const PointerProfile& profile = PointerProfile::gaussian(1.0),
                                  const GridOptions& options = {});
WeakLimitReport weak_limit_report(const MeasurementChain& chain, const PathFunctional& functional,
                                  const std::vector<double>& widths,
                                  const PointerProfile& profile = PointerProfile::gaussian(1.0),
                                  const GridOptions& options = {});

}  // namespace qpathnet
