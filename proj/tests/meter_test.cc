#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.h"
#include "qpathnet/errors.h"
#include "qpathnet/meter.h"

namespace {

using namespace qpathnet;
using oracle::vec2;

RVector values(std::initializer_list<double> v) {
  RVector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

Observable projector() { return Observable::from_basis(CMatrix::Identity(2, 2), values({1.0, 0.0})); }
Observable sigma_z_up_first() { return Observable::from_basis(CMatrix::Identity(2, 2), values({1.0, -1.0})); }

MeasurementChain single_step(const CVector& psi, const CVector& phi, const Observable& obs) {
  return MeasurementChain(StateVector::normalized(psi), {{0.5, obs}}, Propagator::zero(2), 1.0,
                          StateVector::normalized(phi));
}

MeasurementChain spin_chain(const CVector& psi, const CVector& phi) {
  return MeasurementChain(StateVector::normalized(psi),
                          {{1.0, Observable::from_matrix(oracle::pauli_z())}, {2.0, Observable::from_matrix(oracle::pauli_x())}},
                          Propagator::zero(2), 3.0, StateVector::normalized(phi));
}

const PathFunctional kDifference = PathFunctional::linear_combination({{0, -1.0}, {1, 1.0}});
const PathFunctional kStep0 = PathFunctional::eigenvalue_at_step(0);

double squared_norm_on_grid(const PointerProfile& p) {
  const double r = p.shape() == ProfileShape::kGaussian ? 10.0 * p.width() : 2.0 * p.width() + 1.0;
  const auto grid = PointerGrid::uniform(-r, r, p.width() / 4000.0);
  std::vector<double> g2(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) g2[i] = p(grid.at(i)) * p(grid.at(i));
  return trapezoid(grid, g2);
}

TEST(Profile, GaussianFormula) {
  for (double w : {0.1, 1.0, 37.0}) {
    const auto g = PointerProfile::gaussian(w);
    for (double x : {-3.0, 0.0, 0.7, 12.0}) EXPECT_NEAR(g(x), oracle::gaussian(x, w), 1e-15 * (1.0 + oracle::gaussian(x, w)));
  }
}

TEST(Profile, Normalization) {
  std::vector<double> xs, gs;
  for (int i = -20; i <= 20; ++i) {
    xs.push_back(i * 0.1);
    gs.push_back(std::exp(-xs.back() * xs.back()) * (1.0 + 0.3 * std::sin(3.0 * xs.back())));
  }
  for (const auto& p : {PointerProfile::gaussian(0.7), PointerProfile::rectangular(0.5), PointerProfile::rectangular(3.0),
                        PointerProfile::tabulated(xs, gs, 1.3)}) {
    EXPECT_NEAR(squared_norm_on_grid(p), 1.0, 1e-7) << to_string(p.shape());
  }
}

TEST(Profile, ScalingLaw) {
  std::vector<double> xs{-1.0, 0.0, 0.5, 1.0};
  std::vector<double> gs{0.0, 1.0, 0.6, 0.0};
  for (const auto& unit : {PointerProfile::gaussian(1.0), PointerProfile::rectangular(1.0),
                           PointerProfile::tabulated(xs, gs, 1.0)}) {
    for (double w : {0.25, 3.0}) {
      const auto p = unit.with_width(w);
      for (double x : {-2.1, -0.3, 0.1, 0.4, 1.9}) {
        EXPECT_NEAR(p(x), unit(x / w) / std::sqrt(w), 1e-14) << to_string(unit.shape()) << " w=" << w << " x=" << x;
      }
    }
  }
}

TEST(Profile, InvalidInput) {
  EXPECT_THROW(PointerProfile::gaussian(0.0), InvalidArgument);
  EXPECT_THROW(PointerProfile::rectangular(-1.0), InvalidArgument);
  EXPECT_THROW(PointerProfile::tabulated({0.0, 0.0}, {1.0, 1.0}, 1.0), InvalidArgument);
  EXPECT_THROW(PointerProfile::tabulated({0.0, 1.0}, {0.0, 0.0}, 1.0), InvalidArgument);
}

TEST(Grid, UniformCountsAndCap) {
  const auto g = PointerGrid::uniform(-1.0, 1.0, 0.25);
  EXPECT_EQ(g.count, 9u);
  EXPECT_DOUBLE_EQ(g.max(), 1.0);
  EXPECT_THROW(PointerGrid::uniform(0.0, 1.0, 1e-9), InvalidArgument);
  EXPECT_THROW(PointerGrid::uniform(1.0, 0.0, 0.1), InvalidArgument);
}

TEST(FinalPointerState, SingleShift) {
  const AmplitudeDistribution d{{1.5}, {1.0}};
  const auto p = PointerProfile::gaussian(0.3);
  const auto grid = default_grid(d, p);
  const auto m = final_pointer_state(d, p, grid);
  for (std::size_t i = 0; i < grid.count; i += 97) EXPECT_NEAR(m[i].real(), p(grid.at(i) - 1.5), 1e-15);
}

TEST(FinalPointerState, SpinCombination) {
  const auto c = spin_chain(vec2(0.8, 0.6), vec2(std::cos(1.0), std::sin(1.0)));
  const auto d = amplitude_distribution(c, kDifference);
  const auto p = PointerProfile::gaussian(0.8);
  const auto grid = default_grid(d, p);
  const auto m = final_pointer_state(d, p, grid);
  const auto amps = path_amplitudes(c);  // ranks: {1}=0, {3}=1, {2}=2, {4}=3
  for (std::size_t i = 0; i < grid.count; i += 101) {
    const double x = grid.at(i);
    const Complex expected = (amps[0] + amps[3]) * p(x) + amps[2] * p(x + 2.0) + amps[1] * p(x - 2.0);
    EXPECT_LE(std::abs(m[i] - expected), 1e-14);
  }
}

TEST(FinalPointerState, CoverageCheck) {
  const AmplitudeDistribution d{{0.0, 1.0}, {1.0, 1.0}};
  const auto p = PointerProfile::gaussian(1.0);
  EXPECT_THROW(final_pointer_state(d, p, PointerGrid::uniform(-1.0, 2.0, 0.01)), GridTooNarrow);
  EXPECT_NO_THROW(final_pointer_state(d, p, PointerGrid::uniform(-5.0, 6.0, 0.01)));
}

TEST(FinalPointerStateProperty, Linearity) {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto p = PointerProfile::gaussian(0.4);
  const AmplitudeDistribution a{{-1.0, 0.0, 2.0}, {Complex(n(rng), n(rng)), Complex(n(rng), n(rng)), Complex(n(rng), n(rng))}};
  AmplitudeDistribution b = a;
  for (auto& x : b.amplitudes) x = Complex(n(rng), n(rng));
  const Complex s(0.3, -1.2);
  AmplitudeDistribution sum = a;
  for (std::size_t m = 0; m < 3; ++m) sum.amplitudes[m] = a.amplitudes[m] + s * b.amplitudes[m];
  const auto grid = default_grid(a, p);
  const auto ma = final_pointer_state(a, p, grid), mb = final_pointer_state(b, p, grid),
             ms = final_pointer_state(sum, p, grid);
  for (std::size_t i = 0; i < grid.count; ++i) EXPECT_LE(std::abs(ms[i] - (ma[i] + s * mb[i])), 1e-13);
}

TEST(ReadingDistribution, NoPostSelection) {
  const CVector psi = vec2(0.6, Complex(0.0, 0.8));
  const auto c = single_step(psi, vec2(1.0, 0.0), sigma_z_up_first());
  const MeterSpec m{kStep0, PointerProfile::gaussian(0.7)};
  const auto grid = default_grids(c, {m}).front();
  const auto p = unselected_reading_distribution(c, m, grid);
  for (std::size_t i = 0; i < grid.count; i += 53) {
    const double x = grid.at(i);
    const double expected = 0.36 * std::pow(oracle::gaussian(x - 1.0, 0.7), 2) + 0.64 * std::pow(oracle::gaussian(x + 1.0, 0.7), 2);
    EXPECT_NEAR(p.density[i], expected, 1e-14);
  }
  EXPECT_NEAR(p.norm, 1.0, 1e-9);
}

TEST(ReadingDistribution, ForbiddenTransitionFadesInWeakLimit) {
  const auto c = single_step(vec2(1.0, 1.0), vec2(1.0, -1.0), projector());
  const MeterSpec m{kStep0, PointerProfile::gaussian(100.0)};
  const auto p = reading_distribution(c, m, default_grids(c, {m}).front());
  const std::vector<double> f{0.0, 1.0};
  const std::vector<Complex> a{-0.5, 0.5};
  EXPECT_NEAR(p.norm, oracle::gaussian_overlap_norm(f, a, 100.0), 1e-12);
  EXPECT_LT(p.norm, 1e-5);
}

TEST(ReadingDistribution, MinusHundredAtWidthThousand) {
  const auto c = single_step(vec2(1.0, 1.0), vec2(1.0, -1.01), projector());
  const MeterSpec m{kStep0, PointerProfile::gaussian(1e3)};
  const auto p = reading_distribution(c, m, default_grids(c, {m}).front());
  const auto amps = path_amplitudes(c);
  const double oracle_mean = oracle::gaussian_overlap_mean({1.0, 0.0}, {amps[0], amps[1]}, 1e3);
  EXPECT_NEAR(mean_reading(p), oracle_mean, 1e-6);
  EXPECT_NEAR(mean_reading(p), -100.0, 0.5);
}

TEST(ReadingDistribution, ClosedFormGaussianMeanAndDensity) {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> f{-1.0 + 0.3 * n(rng), 0.5 + n(rng), 3.0 + n(rng)};
    std::sort(f.begin(), f.end());
    std::vector<Complex> a{{n(rng), n(rng)}, {n(rng), n(rng)}, {n(rng), n(rng)}};
    const double w = u(rng);
    const AmplitudeDistribution d{f, a};
    const auto p = PointerProfile::gaussian(w);
    const auto dist = reading_distribution(d, p, default_grid(d, p));
    EXPECT_NEAR(mean_reading(dist), oracle::gaussian_overlap_mean(f, a, w), 1e-6);
    EXPECT_NEAR(dist.norm, oracle::gaussian_overlap_norm(f, a, w), 1e-9 * oracle::gaussian_overlap_norm(f, a, w));
    for (std::size_t i = 0; i < dist.grid.count; i += 211) {
      EXPECT_NEAR(dist.density[i], oracle::comb_density(f, a, dist.grid.at(i), w), 1e-12);
    }
  }
}

TEST(ReadingDistribution, UnsortedSupportIsCovered) {
  const AmplitudeDistribution d{{2.5, -2.0, 0.3}, {Complex(0.4, 1.0), -0.7, Complex(0.2, -0.5)}};
  const auto p = PointerProfile::gaussian(0.3);
  const auto grid = default_grid(d, p);
  EXPECT_LE(grid.min, -2.0 - 5.0 * 0.3);
  EXPECT_GE(grid.max(), 2.5 + 5.0 * 0.3);
  const auto dist = reading_distribution(d, p, grid);
  EXPECT_NEAR(mean_reading(dist), oracle::gaussian_overlap_mean(d.support, d.amplitudes, 0.3), 1e-9);
  EXPECT_THROW(final_pointer_state(d, p, PointerGrid::uniform(-4.0, 1.0, 0.01)), GridTooNarrow);
}

TEST(ReadingDistributionProperty, ConservationOverCompleteFinalStates) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 3;
    const CMatrix h = oracle::random_hermitian(rng, dim);
    std::vector<ChainStep> steps;
    const int k_steps = 1 + trial % 2;
    for (int k = 0; k < k_steps; ++k) {
      RVector ev(dim);
      for (int i = 0; i < dim; ++i) ev(i) = i - k;
      steps.push_back({0.4 * (k + 1), Observable::from_basis(oracle::random_unitary(rng, dim), ev)});
    }
    const MeasurementChain c(StateVector(oracle::random_state(rng, dim)), steps, Propagator(h), 1.0,
                             StateVector(oracle::random_state(rng, dim)));
    const PathFunctional f = k_steps == 1 ? kStep0 : kDifference;
    for (const auto& profile : {PointerProfile::gaussian(0.3), PointerProfile::rectangular(0.5)}) {
      const MeterSpec m{f, profile};
      double total = 0.0;
      for (const auto& p : branch_reading_distributions(c, m, default_grids(c, {m}).front())) {
        for (double v : p.density) EXPECT_GE(v, 0.0);
        total += p.norm;
      }
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(MeanReading, SymmetricAndZeroNorm) {
  const AmplitudeDistribution d{{-1.0, 3.0}, {0.5, 0.5}};
  const auto p = PointerProfile::gaussian(0.4);
  EXPECT_NEAR(mean_reading(reading_distribution(d, p, default_grid(d, p))), 1.0, 1e-10);
  PointerDistribution zero{PointerGrid::uniform(0.0, 1.0, 0.5), {0.0, 0.0, 0.0}, 0.0};
  EXPECT_THROW(mean_reading(zero), ZeroProbability);
}

TEST(MeanReading, StrongLimitMatchesStrongMean) {
  const auto c = single_step(vec2(std::sqrt(0.8), std::sqrt(0.2)), vec2(1.0, 1.0), sigma_z_up_first());
  for (const auto& profile : {PointerProfile::gaussian(0.05), PointerProfile::rectangular(0.5)}) {
    const MeterSpec m{kStep0, profile};
    EXPECT_NEAR(mean_reading(reading_distribution(c, m, default_grids(c, {m}).front())), strong_mean(c, kStep0), 1e-6);
  }
}

TEST(ConditionalState, NarrowWindowSelectsEigenstate) {
  const auto c = single_step(vec2(0.6, 0.8), vec2(1.0, 1.0), sigma_z_up_first());
  const MeterSpec m{kStep0, PointerProfile::rectangular(0.5)};
  const auto s = conditional_state(c, m, 1.0).normalize();
  EXPECT_NEAR(std::abs(s[0]), 1.0, 1e-15);
  EXPECT_EQ(std::abs(s[1]), 0.0);
}

TEST(ConditionalState, FlatWindowKeepsState) {
  const CVector psi = vec2(0.6, Complex(0.0, 0.8));
  const auto c = single_step(psi, vec2(1.0, 1.0), sigma_z_up_first());
  const MeterSpec m{kStep0, PointerProfile::rectangular(4.0)};
  const auto s = conditional_state(c, m, 0.0).normalize();
  EXPECT_LE((s.amplitudes() - psi).norm(), 1e-15);
  // Re-measuring the projector onto the normalized state succeeds with certainty.
  EXPECT_NEAR(std::norm(s.inner(conditional_state(c, m, 0.0).normalize())), 1.0, 1e-15);
}

TEST(ConditionalState, GaussianMidpointWeighsEqually) {
  const CVector psi = vec2(0.6, 0.8);
  const auto c = single_step(psi, vec2(1.0, 1.0), sigma_z_up_first());
  const MeterSpec m{kStep0, PointerProfile::gaussian(0.9)};
  const auto s = conditional_state(c, m, 0.0);
  const double g = oracle::gaussian(1.0, 0.9);
  EXPECT_NEAR(s[0].real(), g * 0.6, 1e-15);
  EXPECT_NEAR(s[1].real(), g * 0.8, 1e-15);
}

TEST(ConditionalState, RequiresSingleStep) {
  const auto c = spin_chain(vec2(1.0, 0.0), vec2(1.0, 0.0));
  EXPECT_THROW(conditional_state(c, {kDifference, PointerProfile::gaussian(1.0)}, 0.0), InvalidArgument);
}

MeasurementChain three_box() {
  CVector psi(3), phi(3);
  psi << 1.0, 1.0, 1.0;
  phi << 1.0, -1.0, 1.0;
  return MeasurementChain(StateVector::normalized(psi),
                          {{0.5, Observable::from_basis(CMatrix::Identity(3, 3), values({0, 1, 2}))}},
                          Propagator::zero(3), 1.0, StateVector::normalized(phi));
}

TEST(JointDistribution, SingleMeterReducesExactly) {
  const auto c = spin_chain(vec2(0.8, 0.6), vec2(0.3, 1.0));
  const MeterSpec m{kDifference, PointerProfile::gaussian(0.6)};
  const auto grid = default_grids(c, {m});
  const auto joint = joint_reading_distribution(c, {m}, grid);
  const auto single = reading_distribution(c, m, grid[0]);
  ASSERT_EQ(joint.density.size(), single.density.size());
  for (std::size_t i = 0; i < single.density.size(); ++i) EXPECT_NEAR(joint.density[i], single.density[i], 1e-15);
  EXPECT_NEAR(joint.norm, single.norm, 1e-15);
}

TEST(JointDistribution, MatchesBruteForceDensity) {
  const auto c = three_box();
  const std::vector<MeterSpec> meters{{PathFunctional::indicator_of_path({{0}}), PointerProfile::gaussian(0.7)},
                                      {PathFunctional::indicator_of_path({{2}}), PointerProfile::gaussian(1.1)}};
  const GridOptions opts{0.05, std::nullopt};
  const auto grids = default_grids(c, meters, opts);
  const auto joint = joint_reading_distribution(c, meters, grids);
  const auto amps = path_amplitudes(c);
  const double f1[] = {1, 0, 0}, f3[] = {0, 0, 1};
  const std::size_t n1 = grids[1].count;
  for (std::size_t i = 0; i < grids[0].count; i += 37) {
    for (std::size_t j = 0; j < n1; j += 41) {
      Complex s = 0.0;
      for (int p = 0; p < 3; ++p) {
        s += amps[p] * oracle::gaussian(grids[0].at(i) - f1[p], 0.7) * oracle::gaussian(grids[1].at(j) - f3[p], 1.1);
      }
      EXPECT_NEAR(joint.density[i * n1 + j], std::norm(s), 1e-14);
    }
  }
  // Thread count must not matter.
  EXPECT_EQ(joint_reading_distribution(c, meters, grids, 1).density, joint_reading_distribution(c, meters, grids, 3).density);
}

TEST(JointDistribution, ThreeBoxWeakMarginals) {
  const auto c = three_box();
  const std::vector<MeterSpec> meters{{PathFunctional::indicator_of_path({{0}}), PointerProfile::gaussian(200.0)},
                                      {PathFunctional::indicator_of_path({{2}}), PointerProfile::gaussian(200.0)}};
  const auto joint = joint_reading_distribution(c, meters, default_grids(c, meters));
  EXPECT_NEAR(mean_reading(marginal(joint, 0)), 1.0, 1e-3);
  EXPECT_NEAR(mean_reading(marginal(joint, 1)), 1.0, 1e-3);
}

TEST(JointDistribution, AccurateFirstMeterChangesSecond) {
  const auto c = three_box();
  const std::vector<MeterSpec> meters{{PathFunctional::indicator_of_path({{0}}), PointerProfile::rectangular(0.4)},
                                      {PathFunctional::indicator_of_path({{2}}), PointerProfile::gaussian(20.0)}};
  const auto joint = joint_reading_distribution(c, meters, default_grids(c, meters));
  // A weak first meter leaves the second one averaging Re alpha[3] = 1. An
  // accurate first meter separates path 1 from paths 2 and 3, whose
  // amplitudes cancel, so the second meter now averages close to 0.
  EXPECT_NEAR(mean_reading(marginal(joint, 1)), 0.0, 0.01);
  const auto found = joint.restricted(0, 0.5, 1.5);
  EXPECT_NEAR(mean_reading(marginal(found, 1)), 0.0, 1e-9);
  EXPECT_GT(marginal(found, 1).norm, 0.99 * marginal(joint, 1).norm);
}

double bin(const std::vector<StrongBin>& bins, double f) {
  for (const auto& b : bins) {
    if (std::abs(b.value - f) < 1e-9) return b.probability;
  }
  return std::nan("");
}

TEST(StrongBins, Examples) {
  const auto c = single_step(vec2(std::sqrt(0.8), std::sqrt(0.2)), vec2(1.0, 1.0), projector());
  const auto bins = strong_limit_bins(c, kStep0);
  EXPECT_NEAR(bin(bins, 1.0), 0.4, 1e-15);
  EXPECT_NEAR(bin(bins, 0.0), 0.1, 1e-15);

  const auto sure = single_step(vec2(1.0, 0.0), vec2(1.0, 0.0), sigma_z_up_first());
  const auto b2 = strong_limit_bins(sure, kStep0);
  EXPECT_EQ(bin(b2, 1.0), 1.0);
  EXPECT_EQ(bin(b2, -1.0), 0.0);
}

TEST(StrongBins, RectangularWindowMassesAreExact) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = spin_chain(oracle::random_state(rng, 2), oracle::random_state(rng, 2));
    const auto amps = path_amplitudes(c);
    const MeterSpec m{kDifference, PointerProfile::rectangular(0.5)};
    const auto grid = default_grids(c, {m}).front();
    const auto p = reading_distribution(c, m, grid);
    const std::pair<double, double> expected[] = {
        {-2.0, std::norm(amps[2])}, {0.0, std::norm(amps[0] + amps[3])}, {2.0, std::norm(amps[1])}};
    const auto bins = strong_limit_bins(c, kDifference);
    for (const auto& [centre, mass] : expected) {
      std::vector<double> window(grid.count, 0.0);
      for (std::size_t i = 0; i < grid.count; ++i) {
        if (std::abs(grid.at(i) - centre) <= 0.25 + 1e-9) window[i] = p.density[i];
      }
      EXPECT_NEAR(trapezoid(grid, window), mass, 1e-10);
      EXPECT_NEAR(bin(bins, centre), mass, 1e-12);
    }
  }
}

TEST(WeakLimit, SpinDifferenceAndProjectorLimits) {
  const auto s = spin_chain(vec2(std::cos(0.6), std::sin(0.6)), vec2(std::cos(1.4), std::sin(1.4)));
  const auto amps = path_amplitudes(s);
  const Complex total = amps[0] + amps[1] + amps[2] + amps[3];
  const auto r = weak_limit_report(s, kDifference, {1.0, 10.0, 100.0});
  EXPECT_NEAR(r.limit, 2.0 * ((amps[1] - amps[2]) / total).real(), 1e-12);
  EXPECT_NEAR(r.rows.back().mean, r.limit, 1e-3);

  const auto c = single_step(vec2(std::sqrt(0.8), std::sqrt(0.2)), vec2(1.0, 1.0), projector());
  const auto pr = weak_limit_report(c, kStep0, {1.0, 10.0, 100.0});
  EXPECT_NEAR(pr.limit, 2.0 / 3.0, 1e-12);
  EXPECT_TRUE(pr.monotone);
}

TEST(WeakLimit, SinglePathIsFlat) {
  const auto c = single_step(vec2(1.0, 0.0), vec2(1.0, 0.0), sigma_z_up_first());
  const auto r = weak_limit_report(c, kStep0, {0.1, 1.0, 10.0});
  for (const auto& row : r.rows) EXPECT_NEAR(row.mean, 1.0, 1e-9);
}

TEST(WeakLimit, MinusHundredSweep) {
  const auto c = single_step(vec2(1.0, 1.0), vec2(1.0, -1.01), projector());
  const auto r = weak_limit_report(c, kStep0, {10.0, 1e2, 1e3, 1e4});
  EXPECT_TRUE(r.monotone);
  EXPECT_LT(r.final_error / 100.0, 0.05);
  const auto amps = path_amplitudes(c);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.mean, oracle::gaussian_overlap_mean({1.0, 0.0}, {amps[0], amps[1]}, row.width), 1e-6);
  }
  EXPECT_THROW(weak_limit_report(c, kStep0, {10.0, 10.0}), InvalidArgument);
}

TEST(WeakLimit, ForbiddenTransition) {
  const auto c = single_step(vec2(1.0, 1.0), vec2(1.0, -1.0), projector());
  EXPECT_THROW(weak_limit_report(c, kStep0, {1.0, 10.0}), ForbiddenTransition);
}

TEST(WeakLimitProperty, NonDisturbanceAndShape) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const CVector psi = oracle::random_state(rng, 2), phi = oracle::random_state(rng, 2);
    const auto c = MeasurementChain(StateVector(psi), {{0.5, Observable::from_matrix(oracle::random_hermitian(rng, 2))}},
                                    Propagator::zero(2), 1.0, StateVector(phi));
    const MeterSpec m{kStep0, PointerProfile::gaussian(1e4)};
    const auto p = reading_distribution(c, m, default_grids(c, {m}).front());
    const double overlap = std::norm(phi.dot(psi));
    EXPECT_NEAR(p.norm / overlap, 1.0, 1e-3);
    // P / int P approaches G^2 pointwise.
    for (std::size_t i = 0; i < p.grid.count; i += 401) {
      const double g2 = std::pow(oracle::gaussian(p.grid.at(i), 1e4), 2);
      EXPECT_NEAR(p.density[i] / p.norm, g2, 1e-3 * oracle::gaussian(0.0, 1e4) * oracle::gaussian(0.0, 1e4));
    }
  }
}

TEST(Profile, TabulatedGaussianTracksGaussian) {
  std::vector<double> xs, gs;
  for (int i = -800; i <= 800; ++i) {
    xs.push_back(i * 0.01);
    gs.push_back(oracle::gaussian(xs.back(), 1.0));
  }
  const auto tab = PointerProfile::tabulated(xs, gs, 0.5);
  const AmplitudeDistribution d{{0.0, 1.0}, {0.3, Complex(0.4, 0.2)}};
  const auto mt = mean_reading(reading_distribution(d, tab, default_grid(d, tab)));
  EXPECT_NEAR(mt, oracle::gaussian_overlap_mean(d.support, d.amplitudes, 0.5), 1e-4);
}

}  // namespace
