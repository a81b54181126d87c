#include "qpathnet/meter.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "qpathnet/errors.h"
#include "qpathnet/parallel.h"

namespace qpathnet {

namespace {

constexpr std::size_t kMaxGridPoints = 50'000'000;
constexpr double kEdgeTol = 1e-9;

void check_width(double width) {
  if (!(std::isfinite(width) && width > 0.0)) {
    throw InvalidArgument(fmt::format("pointer width must be positive, got {}", width));
  }
}

void check_coverage(const PointerGrid& grid, double lo, double hi, const PointerProfile& profile) {
  const double r = profile.coverage_radius();
  const double slack = 1e-9 * std::max({1.0, r, std::abs(lo), std::abs(hi)});
  if (grid.count < 2 || grid.min > lo - r + slack || grid.max() < hi + r - slack) {
    throw GridTooNarrow(fmt::format("grid [{}, {}] does not cover [{}, {}] (support +/- {})", grid.min, grid.max(),
                                    lo - r, hi + r, r));
  }
}

double trapezoid_weight(const PointerGrid& grid, std::size_t i) {
  return (i == 0 || i + 1 == grid.count) ? 0.5 * grid.step : grid.step;
}

}  // namespace

std::string to_string(ProfileShape shape) {
  switch (shape) {
    case ProfileShape::kGaussian:
      return "gaussian";
    case ProfileShape::kRectangular:
      return "rectangular";
    case ProfileShape::kTabulated:
      return "tabulated";
  }
  return "unknown";
}

PointerProfile PointerProfile::gaussian(double width) {
  check_width(width);
  PointerProfile p;
  p.shape_ = ProfileShape::kGaussian;
  p.width_ = width;
  return p;
}

PointerProfile PointerProfile::rectangular(double width) {
  check_width(width);
  PointerProfile p;
  p.shape_ = ProfileShape::kRectangular;
  p.width_ = width;
  return p;
}

PointerProfile PointerProfile::tabulated(std::vector<double> x, std::vector<double> g, double width) {
  check_width(width);
  if (x.size() != g.size() || x.size() < 2) {
    throw InvalidArgument("tabulated profile needs at least two (x, g) samples of equal length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(g[i])) throw InvalidArgument("tabulated profile must be finite");
    if (i > 0 && !(x[i] > x[i - 1])) throw InvalidArgument("tabulated profile x must be strictly increasing");
  }
  // Exact integral of the squared piecewise-linear interpolant.
  double norm = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    norm += (x[i] - x[i - 1]) * (g[i - 1] * g[i - 1] + g[i - 1] * g[i] + g[i] * g[i]) / 3.0;
  }
  if (!(norm > 0.0)) throw InvalidArgument("tabulated profile is identically zero");
  const double scale = 1.0 / std::sqrt(norm);
  for (double& v : g) v *= scale;
  PointerProfile p;
  p.shape_ = ProfileShape::kTabulated;
  p.width_ = width;
  p.table_x_ = std::move(x);
  p.table_g_ = std::move(g);
  return p;
}

double PointerProfile::base(double x) const {
  switch (shape_) {
    case ProfileShape::kGaussian:
      return std::exp(-0.25 * x * x) / std::pow(2.0 * std::numbers::pi, 0.25);
    case ProfileShape::kRectangular: {
      const double d = std::abs(x) - 0.5;
      if (std::abs(d) <= kEdgeTol) return std::numbers::sqrt2 / 2.0;
      return d < 0.0 ? 1.0 : 0.0;
    }
    case ProfileShape::kTabulated: {
      if (x < table_x_.front() || x > table_x_.back()) return 0.0;
      const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
      if (it == table_x_.end()) return table_g_.back();
      const auto hi = static_cast<std::size_t>(it - table_x_.begin());
      const std::size_t lo = hi - 1;
      const double t = (x - table_x_[lo]) / (table_x_[hi] - table_x_[lo]);
      return (1.0 - t) * table_g_[lo] + t * table_g_[hi];
    }
  }
  return 0.0;
}

double PointerProfile::operator()(double xi) const { return base(xi / width_) / std::sqrt(width_); }

PointerProfile PointerProfile::with_width(double width) const {
  check_width(width);
  PointerProfile p = *this;
  p.width_ = width;
  return p;
}

double PointerProfile::coverage_radius() const {
  switch (shape_) {
    case ProfileShape::kGaussian:
      return 5.0 * width_;
    case ProfileShape::kRectangular:
      return 0.5 * width_;
    case ProfileShape::kTabulated:
      return std::max(std::abs(table_x_.front()), std::abs(table_x_.back())) * width_;
  }
  return width_;
}

double PointerProfile::default_extent() const {
  switch (shape_) {
    case ProfileShape::kGaussian:
      // G^2 tail past 8 widths is ~1e-15. Post-selected densities can be
      // 1e-5 of the unconditioned ones, so 6 widths is not enough.
      return 8.0 * width_;
    case ProfileShape::kRectangular:
      return width_;
    case ProfileShape::kTabulated:
      return coverage_radius() + 0.5 * width_;
  }
  return width_;
}

PointerGrid PointerGrid::uniform(double min, double max, double step) {
  if (!(std::isfinite(min) && std::isfinite(max) && max > min)) {
    throw InvalidArgument(fmt::format("grid bounds [{}, {}] invalid", min, max));
  }
  if (!(std::isfinite(step) && step > 0.0)) {
    throw InvalidArgument(fmt::format("grid step must be positive, got {}", step));
  }
  const double intervals = std::ceil((max - min) / step - 1e-9);
  if (intervals + 1 > static_cast<double>(kMaxGridPoints)) {
    throw InvalidArgument(fmt::format("grid would need {} points (cap {})", intervals + 1, kMaxGridPoints));
  }
  return {min, step, static_cast<std::size_t>(intervals) + 1};
}

PointerGrid default_grid(double support_min, double support_max, const PointerProfile& profile,
                         const GridOptions& options) {
  const double step = options.step.value_or(profile.width() / 200.0);
  const double extent = options.extent.value_or(profile.default_extent());
  if (!(extent >= 0.0)) throw InvalidArgument("grid extent must be non-negative");
  return PointerGrid::uniform(support_min - extent, support_max + extent, step);
}

PointerGrid default_grid(const AmplitudeDistribution& dist, const PointerProfile& profile,
                         const GridOptions& options) {
  if (dist.size() == 0) throw InvalidArgument("empty amplitude distribution");
  const auto [lo, hi] = std::minmax_element(dist.support.begin(), dist.support.end());
  return default_grid(*lo, *hi, profile, options);
}

double trapezoid(const PointerGrid& grid, const std::vector<double>& values) {
  if (values.size() != grid.count) throw DimensionMismatch("values do not match grid");
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += trapezoid_weight(grid, i) * values[i];
  return s;
}

std::vector<Complex> final_pointer_state(const AmplitudeDistribution& dist, const PointerProfile& profile,
                                         const PointerGrid& grid) {
  if (dist.size() == 0) throw InvalidArgument("empty amplitude distribution");
  // Hand-built distributions need not be sorted.
  const auto [lo, hi] = std::minmax_element(dist.support.begin(), dist.support.end());
  check_coverage(grid, *lo, *hi, profile);
  std::vector<Complex> out(grid.count, Complex(0.0));
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double xi = grid.at(i);
    Complex m = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) m += dist.amplitudes[k] * profile(xi - dist.support[k]);
    out[i] = m;
  }
  return out;
}

PointerDistribution reading_distribution(const AmplitudeDistribution& dist, const PointerProfile& profile,
                                         const PointerGrid& grid) {
  const auto m = final_pointer_state(dist, profile, grid);
  PointerDistribution p{grid, std::vector<double>(grid.count), 0.0};
  for (std::size_t i = 0; i < grid.count; ++i) p.density[i] = std::norm(m[i]);
  p.norm = trapezoid(grid, p.density);
  return p;
}

PointerDistribution reading_distribution(const MeasurementChain& chain, const MeterSpec& meter,
                                         const PointerGrid& grid) {
  return reading_distribution(amplitude_distribution(chain, meter.functional), meter.profile, grid);
}

std::vector<PointerDistribution> branch_reading_distributions(const MeasurementChain& chain,
                                                              const MeterSpec& meter, const PointerGrid& grid) {
  std::vector<PointerDistribution> out;
  out.push_back(reading_distribution(chain, meter, grid));
  for (const auto& s : chain.completion()) out.push_back(reading_distribution(chain.with_post_state(s), meter, grid));
  return out;
}

PointerDistribution unselected_reading_distribution(const MeasurementChain& chain, const MeterSpec& meter,
                                                    const PointerGrid& grid) {
  auto branches = branch_reading_distributions(chain, meter, grid);
  PointerDistribution total = branches.front();
  for (std::size_t b = 1; b < branches.size(); ++b) {
    for (std::size_t i = 0; i < grid.count; ++i) total.density[i] += branches[b].density[i];
  }
  total.norm = trapezoid(grid, total.density);
  return total;
}

double mean_reading(const PointerDistribution& p) {
  if (!(p.norm > 0.0) || !std::isfinite(p.norm)) {
    throw ZeroProbability("reading distribution has zero norm (forbidden transition)");
  }
  double num = 0.0;
  for (std::size_t i = 0; i < p.grid.count; ++i) num += trapezoid_weight(p.grid, i) * p.grid.at(i) * p.density[i];
  return num / p.norm;
}

StateVector conditional_state(const MeasurementChain& chain, const MeterSpec& meter, double xi0) {
  if (chain.step_count() != 1) {
    throw InvalidArgument(
        fmt::format("conditional_state needs exactly one intermediate step, chain has {}", chain.step_count()));
  }
  const auto values = meter.functional.values(chain);
  const Observable& obs = chain.step(0).observable;
  const CVector c = obs.eigenvectors().adjoint() *
                    (chain.propagator().unitary(chain.step(0).time) * chain.pre_state().amplitudes());
  CVector out = CVector::Zero(static_cast<Eigen::Index>(chain.dim()));
  for (std::size_t i = 0; i < chain.dim(); ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    out += meter.profile(xi0 - values[i]) * c(ei) * obs.eigenvectors().col(ei);
  }
  return StateVector(std::move(out));
}

namespace {

struct JointGroup {
  std::vector<double> shifts;
  Complex amplitude;
};

std::vector<JointGroup> group_joint(const MeasurementChain& chain, const std::vector<MeterSpec>& meters) {
  std::vector<std::vector<double>> values;
  for (const auto& m : meters) values.push_back(m.functional.values(chain));
  const auto amps = path_amplitudes(chain);
  const std::size_t n = amps.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto tuple_less = [&](std::size_t a, std::size_t b) {
    for (const auto& v : values) {
      if (v[a] != v[b]) return v[a] < v[b];
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), tuple_less);

  std::vector<JointGroup> groups;
  std::vector<std::size_t> anchor_of_group;
  std::size_t i = 0;
  while (i < n) {
    const std::size_t anchor = order[i];
    std::size_t j = i + 1;
    auto same = [&](std::size_t x) {
      for (const auto& v : values) {
        if (std::abs(v[x] - v[anchor]) > kDefaultMergeTol) return false;
      }
      return true;
    };
    while (j < n && same(order[j])) ++j;
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(i),
                                     order.begin() + static_cast<std::ptrdiff_t>(j));
    std::sort(members.begin(), members.end());
    JointGroup g;
    for (const auto& v : values) g.shifts.push_back(v[anchor]);
    g.amplitude = 0.0;
    for (std::size_t m : members) g.amplitude += amps[m];
    groups.push_back(std::move(g));
    i = j;
  }
  return groups;
}

double joint_norm(const JointDistribution& joint) {
  const std::size_t axes = joint.grids.size();
  std::vector<std::size_t> idx(axes, 0);
  double s = 0.0;
  for (double d : joint.density) {
    double w = 1.0;
    for (std::size_t r = 0; r < axes; ++r) w *= trapezoid_weight(joint.grids[r], idx[r]);
    s += w * d;
    for (std::size_t r = axes; r-- > 0;) {
      if (++idx[r] < joint.grids[r].count) break;
      idx[r] = 0;
    }
  }
  return s;
}

}  // namespace

JointDistribution JointDistribution::restricted(std::size_t axis, double lo, double hi) const {
  if (axis >= grids.size()) throw InvalidArgument("axis out of range");
  JointDistribution out = *this;
  std::size_t inner = 1;
  for (std::size_t r = axis + 1; r < grids.size(); ++r) inner *= grids[r].count;
  const std::size_t n_axis = grids[axis].count;
  for (std::size_t flat = 0; flat < out.density.size(); ++flat) {
    const double x = grids[axis].at((flat / inner) % n_axis);
    if (x < lo || x > hi) out.density[flat] = 0.0;
  }
  out.norm = joint_norm(out);
  return out;
}

JointDistribution joint_reading_distribution(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
                                             const std::vector<PointerGrid>& grids, std::size_t threads) {
  if (meters.empty()) throw InvalidArgument("at least one meter is required");
  if (meters.size() != grids.size()) throw InvalidArgument("one grid per meter is required");
  const std::size_t axes = meters.size();
  const auto groups = group_joint(chain, meters);

  std::size_t total = 1;
  for (std::size_t r = 0; r < axes; ++r) {
    double lo = groups.front().shifts[r];
    double hi = lo;
    for (const auto& g : groups) {
      lo = std::min(lo, g.shifts[r]);
      hi = std::max(hi, g.shifts[r]);
    }
    check_coverage(grids[r], lo, hi, meters[r].profile);
    total *= grids[r].count;
    if (total > kMaxGridPoints) throw InvalidArgument("joint grid exceeds the point cap");
  }

  // g_tables[r][group][i] = G_r(xi_i - shift)
  std::vector<std::vector<std::vector<double>>> g_tables(axes);
  for (std::size_t r = 0; r < axes; ++r) {
    for (const auto& g : groups) {
      std::vector<double> t(grids[r].count);
      for (std::size_t i = 0; i < grids[r].count; ++i) t[i] = meters[r].profile(grids[r].at(i) - g.shifts[r]);
      g_tables[r].push_back(std::move(t));
    }
  }

  JointDistribution joint{grids, std::vector<double>(total, 0.0), 0.0};
  const std::size_t slab = total / grids[0].count;
  parallel_for(
      grids[0].count,
      [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> idx(axes, 0);
        for (std::size_t i0 = begin; i0 < end; ++i0) {
          std::fill(idx.begin(), idx.end(), 0);
          idx[0] = i0;
          for (std::size_t k = 0; k < slab; ++k) {
            Complex m = 0.0;
            for (std::size_t g = 0; g < groups.size(); ++g) {
              double w = 1.0;
              for (std::size_t r = 0; r < axes; ++r) w *= g_tables[r][g][idx[r]];
              m += groups[g].amplitude * w;
            }
            joint.density[i0 * slab + k] = std::norm(m);
            for (std::size_t r = axes; r-- > 1;) {
              if (++idx[r] < grids[r].count) break;
              idx[r] = 0;
            }
          }
        }
      },
      threads);
  joint.norm = joint_norm(joint);
  return joint;
}

std::vector<JointDistribution> branch_joint_distributions(const MeasurementChain& chain,
                                                          const std::vector<MeterSpec>& meters,
                                                          const std::vector<PointerGrid>& grids,
                                                          std::size_t threads) {
  std::vector<JointDistribution> out;
  out.push_back(joint_reading_distribution(chain, meters, grids, threads));
  for (const auto& s : chain.completion()) {
    out.push_back(joint_reading_distribution(chain.with_post_state(s), meters, grids, threads));
  }
  return out;
}

PointerDistribution marginal(const JointDistribution& joint, std::size_t axis) {
  if (axis >= joint.axes()) throw InvalidArgument("axis out of range");
  const PointerGrid& g = joint.grids[axis];
  PointerDistribution out{g, std::vector<double>(g.count, 0.0), 0.0};
  const std::size_t axes = joint.axes();
  std::vector<std::size_t> idx(axes, 0);
  for (double d : joint.density) {
    double w = 1.0;
    for (std::size_t r = 0; r < axes; ++r) {
      if (r != axis) w *= trapezoid_weight(joint.grids[r], idx[r]);
    }
    out.density[idx[axis]] += w * d;
    for (std::size_t r = axes; r-- > 0;) {
      if (++idx[r] < joint.grids[r].count) break;
      idx[r] = 0;
    }
  }
  out.norm = trapezoid(g, out.density);
  return out;
}

std::vector<PointerGrid> default_grids(const MeasurementChain& chain, const std::vector<MeterSpec>& meters,
                                       const GridOptions& options) {
  std::vector<PointerGrid> grids;
  for (const auto& m : meters) {
    const auto v = m.functional.values(chain);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    grids.push_back(default_grid(*lo, *hi, m.profile, options));
  }
  return grids;
}

std::vector<StrongBin> strong_limit_bins(const AmplitudeDistribution& dist) {
  std::vector<StrongBin> bins;
  for (std::size_t m = 0; m < dist.size(); ++m) bins.push_back({dist.support[m], std::norm(dist.amplitudes[m])});
  return bins;
}

std::vector<StrongBin> strong_limit_bins(const MeasurementChain& chain, const PathFunctional& functional) {
  return strong_limit_bins(amplitude_distribution(chain, functional));
}

std::vector<StrongBin> normalized(std::vector<StrongBin> bins) {
  double total = 0.0;
  for (const auto& b : bins) total += b.probability;
  if (!(total > 0.0)) throw ZeroProbability("strong bins carry no probability");
  for (auto& b : bins) b.probability /= total;
  return bins;
}

WeakLimitReport weak_limit_report(const AmplitudeDistribution& dist, const std::vector<double>& widths,
                                  const PointerProfile& profile, const GridOptions& options) {
  if (widths.empty()) throw InvalidArgument("weak-limit sweep needs at least one width");
  for (std::size_t i = 1; i < widths.size(); ++i) {
    if (!(widths[i] > widths[i - 1])) throw InvalidArgument("weak-limit widths must be strictly increasing");
  }
  WeakLimitReport report;
  report.weak_value = weak_value(dist);
  report.limit = report.weak_value.real();
  for (double w : widths) {
    const PointerProfile p = profile.with_width(w);
    const auto dens = reading_distribution(dist, p, default_grid(dist, p, options));
    const double mean = mean_reading(dens);
    report.rows.push_back({w, mean, std::abs(mean - report.limit)});
  }
  report.monotone = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (!(report.rows[i].error < report.rows[i - 1].error)) report.monotone = false;
  }
  report.final_error = report.rows.back().error;
  return report;
}

WeakLimitReport weak_limit_report(const MeasurementChain& chain, const PathFunctional& functional,
                                  const std::vector<double>& widths, const PointerProfile& profile,
                                  const GridOptions& options) {
  return weak_limit_report(amplitude_distribution(chain, functional), widths, profile, options);
}

}  // namespace qpathnet
