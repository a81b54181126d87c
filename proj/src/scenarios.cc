#include "qpathnet/scenarios.h"

#include <cmath>

#include <fmt/format.h>

#include "qpathnet/errors.h"

namespace qpathnet {

namespace {

CMatrix computational_basis(std::size_t dim) {
  return CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

double bin_value(const std::vector<StrongBin>& bins, double f) {
  for (const auto& b : bins) {
    if (std::abs(b.value - f) <= kDefaultMergeTol) return b.probability;
  }
  return 0.0;
}

Complex alpha_at(const std::vector<RelativeAmplitude>& rel, double f) {
  for (const auto& r : rel) {
    if (std::abs(r.value - f) <= kDefaultMergeTol) return r.alpha;
  }
  return 0.0;
}

ExpectedValue analytic(std::string name, double expected, std::string derivation,
                       std::function<double(const ScenarioPreset&)> f) {
  return {std::move(name), expected, ToleranceClass::kAnalytic, std::move(derivation), std::nullopt,
          [f = std::move(f)](const ScenarioPreset& p) { return Measured{f(p)}; }};
}

// Mean reading of meter 0 on its default grid.
double preset_mean_reading(const ScenarioPreset& p) {
  const auto& m = p.meters.front();
  const auto grid = default_grids(p.chain, {m}).front();
  return mean_reading(reading_distribution(p.chain, m, grid));
}

}  // namespace

std::string to_string(ToleranceClass c) {
  switch (c) {
    case ToleranceClass::kAnalytic:
      return "analytic";
    case ToleranceClass::kQuadrature:
      return "quadrature";
    case ToleranceClass::kSweepLimit:
      return "sweep-limit";
    case ToleranceClass::kMonteCarlo:
      return "monte-carlo";
  }
  return "unknown";
}

bool VerificationReport::all_pass() const {
  for (const auto& e : entries) {
    if (!e.pass) return false;
  }
  return true;
}

VerificationReport verify_preset(const ScenarioPreset& preset, const Tolerances& tolerances) {
  VerificationReport report{preset.name, {}};
  for (const auto& e : preset.expected) {
    VerificationEntry entry{e.name, e.tolerance_class, e.derivation, e.expected, 0.0, 0.0, 0.0, false};
    try {
      const Measured m = e.compute(preset);
      entry.computed = m.value;
      entry.delta = std::abs(m.value - e.expected);
      switch (e.tolerance_class) {
        case ToleranceClass::kAnalytic:
          entry.allowed = e.tolerance.value_or(tolerances.analytic);
          break;
        case ToleranceClass::kQuadrature:
          entry.allowed = e.tolerance.value_or(tolerances.quadrature);
          break;
        case ToleranceClass::kSweepLimit:
          entry.allowed = e.tolerance.value_or(tolerances.sweep_relative) * std::abs(e.expected);
          break;
        case ToleranceClass::kMonteCarlo:
          entry.allowed = e.tolerance.value_or(tolerances.mc_sigmas) * m.standard_error;
          break;
      }
      entry.pass = std::isfinite(entry.delta) && entry.delta <= entry.allowed;
    } catch (const std::exception&) {
      entry.computed = std::nan("");
      entry.delta = std::nan("");
      entry.pass = false;
    }
    report.entries.push_back(entry);
  }
  return report;
}

double gaussian_mean_closed_form(const AmplitudeDistribution& dist, double width) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < dist.size(); ++m) {
    for (std::size_t n = 0; n < dist.size(); ++n) {
      const double df = dist.support[m] - dist.support[n];
      const double overlap = std::real(dist.amplitudes[m] * std::conj(dist.amplitudes[n])) *
                             std::exp(-df * df / (8.0 * width * width));
      num += overlap * 0.5 * (dist.support[m] + dist.support[n]);
      den += overlap;
    }
  }
  return num / den;
}

ScenarioPreset build_projector_postselected(const StateVector& psi, const StateVector& phi,
                                            std::vector<double> widths) {
  if (psi.dim() != 2 || phi.dim() != 2) throw InvalidArgument("projector preset is two-level");
  if (widths.empty()) throw InvalidArgument("at least one meter width is required");
  RVector eig(2);
  eig << 1.0, 0.0;
  MeasurementChain chain(psi, {{0.5, Observable::from_basis(computational_basis(2), eig)}}, Propagator::zero(2), 1.0,
                         phi);
  const PathFunctional f = PathFunctional::eigenvalue_at_step(0);
  const double width = widths.back();

  // Independent amplitude products <phi|i><i|psi> with H = 0.
  const Complex a1 = std::conj(phi[0]) * psi[0];
  const Complex a2 = std::conj(phi[1]) * psi[1];
  const double p1 = std::norm(a1);
  const double p2 = std::norm(a2);

  ScenarioPreset preset{"projector", chain, {{f, PointerProfile::gaussian(width)}}, widths, {}, 1, 100'000};
  auto& ex = preset.expected;
  ex.push_back(analytic("strong_bin_1", p1, "|<phi|1><1|psi>|^2", [f](const ScenarioPreset& p) {
    return bin_value(strong_limit_bins(p.chain, f), 1.0);
  }));
  ex.push_back(analytic("strong_bin_0", p2, "|<phi|2><2|psi>|^2", [f](const ScenarioPreset& p) {
    return bin_value(strong_limit_bins(p.chain, f), 0.0);
  }));
  if (p1 + p2 > 0.0) {
    ex.push_back(analytic("strong_mean", p1 / (p1 + p2), "p[1]/(p[1]+p[2])",
                          [f](const ScenarioPreset& p) { return strong_mean(p.chain, f); }));
  }
  const Complex total = a1 + a2;
  if (std::abs(total) > kForbiddenThreshold) {
    const Complex alpha1 = a1 / total;
    ex.push_back(analytic("weak_value_re", alpha1.real(), "Re alpha[1]",
                          [f](const ScenarioPreset& p) { return weak_value(p.chain, f).real(); }));
    ex.push_back(analytic("weak_value_im", alpha1.imag(), "Im alpha[1]",
                          [f](const ScenarioPreset& p) { return weak_value(p.chain, f).imag(); }));
    AmplitudeDistribution direct{{0.0, 1.0}, {a2, a1}};
    ex.push_back({"mean_reading", gaussian_mean_closed_form(direct, width), ToleranceClass::kQuadrature,
                  "Gaussian overlap closed form", std::nullopt,
                  [](const ScenarioPreset& p) { return Measured{preset_mean_reading(p)}; }});
  } else {
    ex.push_back(analytic("forbidden_transition", 1.0, "|<phi|psi>| below threshold", [f](const ScenarioPreset& p) {
      try {
        weak_value(p.chain, f);
      } catch (const ForbiddenTransition&) {
        return 1.0;
      }
      return 0.0;
    }));
  }
  // Accurate pointer: the fraction of post-selected readings near 1 estimates p[1]/(p[1]+p[2]).
  if (width <= 0.1 && p1 + p2 > 0.0) {
    ex.push_back({"mc_fraction_near_1", p1 / (p1 + p2), ToleranceClass::kMonteCarlo, "binomial, p[1]/(p[1]+p[2])",
                  std::nullopt, [](const ScenarioPreset& p) {
                    const auto grids = default_grids(p.chain, p.meters);
                    const auto r = sample_trials(p.chain, p.meters, grids, p.trials, p.seed);
                    std::size_t near = 0;
                    for (const auto& t : r.trials) {
                      if (t.postselected() && std::abs(t.readings[0] - 1.0) < 0.5) ++near;
                    }
                    const auto n = static_cast<double>(r.summary.accepted);
                    const double frac = static_cast<double>(near) / n;
                    return Measured{frac, std::sqrt(frac * (1.0 - frac) / n)};
                  }});
  }
  return preset;
}

ScenarioPreset build_difference_meter(const StateVector& psi, const StateVector& phi, const Observable& a,
                                      const Observable& b, double t1, double t2, std::vector<double> widths,
                                      ProfileShape shape) {
  if (psi.dim() != 2) throw InvalidArgument("difference preset is two-level");
  if (widths.empty()) throw InvalidArgument("at least one meter width is required");
  if (!(0.0 < t1 && t1 < t2)) throw InvalidArgument("need 0 < t1 < t2");
  MeasurementChain chain(psi, {{t1, a}, {t2, b}}, Propagator::zero(2), 2.0 * t2 - t1, phi);
  const PathFunctional f = PathFunctional::linear_combination({{0, -1.0}, {1, 1.0}});
  const double width = widths.back();
  const PointerProfile profile =
      shape == ProfileShape::kRectangular ? PointerProfile::rectangular(width) : PointerProfile::gaussian(width);

  // Four amplitudes <phi|i_B><i_B|i_A><i_A|psi>, keyed as in the two-step
  // enumeration: paths[iA][iB]; the values b_iB - a_iA.
  Complex amp[2][2];
  double val[2][2];
  for (int ia = 0; ia < 2; ++ia) {
    for (int ib = 0; ib < 2; ++ib) {
      amp[ia][ib] = phi.amplitudes().dot(b.eigenvector(ib)) * b.eigenvector(ib).dot(a.eigenvector(ia)) *
                    a.eigenvector(ia).dot(psi.amplitudes());
      val[ia][ib] = b.eigenvalue(ib) - a.eigenvalue(ia);
    }
  }

  ScenarioPreset preset{"difference", chain, {{f, profile}}, widths, {}, 1, 100'000};
  auto& ex = preset.expected;

  // Spin-like spectra (-1, 1): the usual three-valued comb.
  auto near = [](double x, double y) { return std::abs(x - y) <= 1e-12; };
  const bool spins = near(a.eigenvalue(0), -1.0) && near(a.eigenvalue(1), 1.0) && near(b.eigenvalue(0), -1.0) &&
                     near(b.eigenvalue(1), 1.0);
  if (spins) {
    // path labels: {1} = (1_A,1_B), {2} = (2_A,1_B), {3} = (1_A,2_B), {4} = (2_A,2_B)
    const Complex A1 = amp[0][0], A2 = amp[1][0], A3 = amp[0][1], A4 = amp[1][1];
    const double p14 = std::norm(A1 + A4), p2 = std::norm(A2), p3 = std::norm(A3);
    ex.push_back(analytic("support_size", 3.0, "values -2, 0, 2", [f](const ScenarioPreset& p) {
      return static_cast<double>(amplitude_distribution(p.chain, f).size());
    }));
    ex.push_back(analytic("strong_bin_m2", p2, "|A[2]|^2", [f](const ScenarioPreset& p) {
      return bin_value(strong_limit_bins(p.chain, f), -2.0);
    }));
    ex.push_back(analytic("strong_bin_0", p14, "|A[1]+A[4]|^2", [f](const ScenarioPreset& p) {
      return bin_value(strong_limit_bins(p.chain, f), 0.0);
    }));
    ex.push_back(analytic("strong_bin_2", p3, "|A[3]|^2", [f](const ScenarioPreset& p) {
      return bin_value(strong_limit_bins(p.chain, f), 2.0);
    }));
    if (p14 + p2 + p3 > 0.0) {
      ex.push_back(analytic("strong_mean", 2.0 * (p3 - p2) / (p14 + p2 + p3), "sum F p / sum p with F = 0, -2, 2",
                            [f](const ScenarioPreset& p) { return strong_mean(p.chain, f); }));
    }
    const Complex total = A1 + A2 + A3 + A4;
    if (std::abs(total) > kForbiddenThreshold) {
      ex.push_back(analytic("weak_mean", 2.0 * ((A3 - A2) / total).real(), "2 Re(alpha[3] - alpha[2])",
                            [f](const ScenarioPreset& p) { return weak_value(p.chain, f).real(); }));
    }
    if (shape == ProfileShape::kRectangular && width < 2.0) {
      // Disjoint windows: the mass inside each window is the strong bin.
      const std::pair<double, double> windows[] = {{-2.0, p2}, {0.0, p14}, {2.0, p3}};
      for (const auto& [centre, mass] : windows) {
        ex.push_back({fmt::format("window_mass_{}", centre), mass, ToleranceClass::kAnalytic,
                      "rectangular window below the support gap", 1e-10,
                      [centre = centre](const ScenarioPreset& p) {
                        const auto& m = p.meters.front();
                        const auto grid = default_grids(p.chain, {m}).front();
                        const auto dens = reading_distribution(p.chain, m, grid);
                        const double half = 0.5 * m.profile.width();
                        std::vector<double> window(grid.count, 0.0);
                        for (std::size_t i = 0; i < grid.count; ++i) {
                          if (std::abs(grid.at(i) - centre) <= half * (1.0 + 1e-9)) window[i] = dens.density[i];
                        }
                        return Measured{trapezoid(grid, window)};
                      }});
      }
    }
  } else {
    double num = 0.0, den = 0.0;
    Complex wnum = 0.0, wden = 0.0;
    std::vector<double> vals;
    std::vector<Complex> amps;
    for (int ia = 0; ia < 2; ++ia) {
      for (int ib = 0; ib < 2; ++ib) {
        vals.push_back(val[ia][ib]);
        amps.push_back(amp[ia][ib]);
        wnum += val[ia][ib] * amp[ia][ib];
        wden += amp[ia][ib];
      }
    }
    const auto grouped = group_amplitudes(vals, amps);
    for (std::size_t m = 0; m < grouped.size(); ++m) {
      num += grouped.support[m] * std::norm(grouped.amplitudes[m]);
      den += std::norm(grouped.amplitudes[m]);
    }
    if (den > 0.0) {
      ex.push_back(analytic("strong_mean", num / den, "grouped |A|^2 average",
                            [f](const ScenarioPreset& p) { return strong_mean(p.chain, f); }));
    }
    if (std::abs(wden) > kForbiddenThreshold) {
      ex.push_back(analytic("weak_mean", (wnum / wden).real(), "Re sum F A / sum A",
                            [f](const ScenarioPreset& p) { return weak_value(p.chain, f).real(); }));
    }
  }
  return preset;
}

ScenarioPreset build_three_box(Complex c, double width) {
  const double phase = std::abs(c) > 0.0 ? std::arg(c) : 0.0;
  CVector psi(3), phi(3);
  psi << 1.0, 1.0, 1.0;
  // A[i] = conj(phi_i) psi_i = (C, -C, C) with C = e^{i phase} / 3
  const Complex e = std::exp(Complex(0.0, -phase));
  phi << e, -e, e;
  RVector eig(3);
  eig << 0.0, 1.0, 2.0;
  MeasurementChain chain(StateVector::normalized(psi),
                         {{0.5, Observable::from_basis(computational_basis(3), eig)}}, Propagator::zero(3), 1.0,
                         StateVector::normalized(phi));
  const PathFunctional f1 = PathFunctional::indicator_of_path({{0}});
  const PathFunctional f2 = PathFunctional::indicator_of_path({{1}});
  const PathFunctional f3 = PathFunctional::indicator_of_path({{2}});

  ScenarioPreset preset{"three-box",
                        chain,
                        {{f1, PointerProfile::gaussian(width)}, {f3, PointerProfile::gaussian(width)}},
                        {width},
                        {},
                        1,
                        100'000};
  auto& ex = preset.expected;
  auto re_alpha = [](PathFunctional f) {
    return [f](const ScenarioPreset& p) { return alpha_at(relative_amplitudes(p.chain, f), 1.0).real(); };
  };
  ex.push_back(analytic("re_alpha_1", 1.0, "Re alpha[1] = 1", re_alpha(f1)));
  ex.push_back(analytic("re_alpha_2", -1.0, "alphas sum to one, so Re alpha[2] = -1", re_alpha(f2)));
  ex.push_back(analytic("re_alpha_3", 1.0, "Re alpha[3] = 1", re_alpha(f3)));
  ex.push_back(analytic("sum_alpha", 1.0, "relative amplitudes add up to one", [](const ScenarioPreset& p) {
    const auto table = PathFunctional::table({0.0, 1.0, 2.0});
    Complex s = 0.0;
    for (const auto& r : relative_amplitudes(p.chain, table)) s += r.alpha;
    return s.real();
  }));
  ex.push_back(analytic("strong_F1_on_path_1", 1.0, "accurate F1 always finds path 1", [f1](const ScenarioPreset& p) {
    return bin_value(normalized(strong_limit_bins(p.chain, f1)), 1.0);
  }));
  ex.push_back(analytic("strong_F3_on_path_3", 1.0, "accurate F3 always finds path 3", [f3](const ScenarioPreset& p) {
    return bin_value(normalized(strong_limit_bins(p.chain, f3)), 1.0);
  }));
  for (std::size_t axis = 0; axis < 2; ++axis) {
    ex.push_back({fmt::format("weak_marginal_{}", axis + 1), 1.0, ToleranceClass::kQuadrature,
                  axis == 0 ? "xi_1 = Re alpha[1] = 1" : "xi_2 = Re alpha[3] = 1", 1e-3,
                  [axis](const ScenarioPreset& p) {
                    const auto joint = joint_reading_distribution(p.chain, p.meters, default_grids(p.chain, p.meters));
                    return Measured{mean_reading(marginal(joint, axis))};
                  }});
  }
  return preset;
}

ScenarioPreset build_minus_hundred(std::vector<double> widths) {
  CVector psi(2), phi(2);
  psi << 1.0, 1.0;
  phi << 1.0, -1.01;
  ScenarioPreset preset =
      build_projector_postselected(StateVector::normalized(psi), StateVector::normalized(phi), widths);
  preset.name = "minus-hundred";
  const PathFunctional f = preset.meters.front().functional;
  auto& ex = preset.expected;
  ex.push_back(analytic("alpha_1", -100.0, "A[1]=1, A[2]=-1.01 gives -100", [f](const ScenarioPreset& p) {
    return alpha_at(relative_amplitudes(p.chain, f), 1.0).real();
  }));
  ex.push_back(analytic("alpha_2", 101.0, "1 - alpha[1]", [f](const ScenarioPreset& p) {
    return alpha_at(relative_amplitudes(p.chain, f), 0.0).real();
  }));
  if (widths.size() > 1) {
    ex.push_back({"sweep_final_mean", -100.0, ToleranceClass::kSweepLimit, "weak value -100", std::nullopt,
                  [f](const ScenarioPreset& p) {
                    return Measured{weak_limit_report(p.chain, f, p.widths).rows.back().mean};
                  }});
    ex.push_back(analytic("sweep_error_decreasing", 1.0, "Gaussian overlap closed form", [f](const ScenarioPreset& p) {
      return weak_limit_report(p.chain, f, p.widths).monotone ? 1.0 : 0.0;
    }));
  }
  return preset;
}

std::vector<std::string> preset_names() { return {"projector", "difference", "minus-hundred", "three-box"}; }

ScenarioPreset preset_by_name(const std::string& name) {
  if (name == "projector") {
    CVector psi(2), phi(2);
    psi << std::sqrt(0.8), std::sqrt(0.2);
    phi << 1.0, 1.0;
    return build_projector_postselected(StateVector(psi), StateVector::normalized(phi), {0.05});
  }
  if (name == "difference") {
    CVector psi(2), phi(2);
    psi << std::cos(0.6), std::sin(0.6);
    phi << std::cos(1.4), std::sin(1.4);
    CMatrix sz(2, 2), sx(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    sx << 0.0, 1.0, 1.0, 0.0;
    return build_difference_meter(StateVector(psi), StateVector(phi), Observable::from_matrix(sz),
                                  Observable::from_matrix(sx), 1.0, 2.0, {0.5}, ProfileShape::kRectangular);
  }
  if (name == "minus-hundred") return build_minus_hundred();
  if (name == "three-box") return build_three_box();
  throw InvalidArgument(fmt::format("unknown preset '{}' (known: projector, difference, minus-hundred, three-box)", name));
}

ClassicalNetwork two_stage_network(const std::array<std::array<double, 2>, 2>& w_in,
                                   const std::array<std::array<double, 2>, 2>& w_a1,
                                   const std::array<std::array<double, 2>, 2>& w_a2,
                                   const std::array<std::array<double, 2>, 2>& w_b1,
                                   const std::array<std::array<double, 2>, 2>& w_b2,
                                   const std::array<double, 4>& values) {
  std::vector<ClassicalConnector> c;
  c.push_back({"in", w_in, {Outlet::to_connector("a1", 0), Outlet::to_connector("a2", 0)}, 0.0});
  c.push_back({"a1", w_a1, {Outlet::to_connector("b1", 0), Outlet::to_connector("b2", 1)}, values[0]});
  c.push_back({"a2", w_a2, {Outlet::to_connector("b2", 0), Outlet::to_connector("b1", 1)}, values[1]});
  c.push_back({"b1", w_b1, {Outlet::to_receptacle("f1"), Outlet::to_receptacle("f2")}, values[2]});
  c.push_back({"b2", w_b2, {Outlet::to_receptacle("f2"), Outlet::to_receptacle("f1")}, values[3]});
  return ClassicalNetwork(std::move(c), "in", 0);
}

ClassicalNetwork classical_comparator(const MeasurementChain& chain) {
  if (chain.dim() != 2 || chain.step_count() != 2) {
    throw InvalidArgument("classical comparator needs a two-level chain with two steps");
  }
  const auto& prop = chain.propagator();
  const auto& sa = chain.step(0);
  const auto& sb = chain.step(1);
  const CVector psi_t1 = prop.unitary(sa.time) * chain.pre_state().amplitudes();
  const CMatrix u_ab = prop.unitary(sb.time - sa.time);
  const CVector phi_back = prop.unitary(chain.final_time() - sb.time).adjoint() * chain.post_state().amplitudes();

  auto p_a = [&](int ia) { return std::norm(sa.observable.eigenvector(ia).dot(psi_t1)); };
  auto p_ba = [&](int ib, int ia) { return std::norm(sb.observable.eigenvector(ib).dot(u_ab * sa.observable.eigenvector(ia))); };
  auto p_fb = [&](int ib) { return std::norm(phi_back.dot(sb.observable.eigenvector(ib))); };
  auto column = [](double first, double second) {
    return std::array<std::array<double, 2>, 2>{{{first, first}, {second, second}}};
  };
  // a1 outlet 0 -> b1, outlet 1 -> b2; a2 outlet 0 -> b2, outlet 1 -> b1;
  // b1 outlet 0 -> f1; b2 outlet 1 -> f1.
  return two_stage_network(column(p_a(0), p_a(1)), column(p_ba(0, 0), p_ba(1, 0)), column(p_ba(1, 1), p_ba(0, 1)),
                           column(p_fb(0), 1.0 - p_fb(0)), column(1.0 - p_fb(1), p_fb(1)),
                           {sa.observable.eigenvalue(0), sa.observable.eigenvalue(1), sb.observable.eigenvalue(0),
                            sb.observable.eigenvalue(1)});
}

}  // namespace qpathnet
