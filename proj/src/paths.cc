#include "qpathnet/paths.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "qpathnet/errors.h"
#include "qpathnet/parallel.h"

namespace qpathnet {

namespace {

std::vector<StateVector> householder_completion(const StateVector& post) {
  const auto d = static_cast<Eigen::Index>(post.dim());
  CMatrix seed(d, d + 1);
  seed.col(0) = post.amplitudes();
  seed.rightCols(d) = CMatrix::Identity(d, d);
  Eigen::HouseholderQR<CMatrix> qr(seed);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  std::vector<StateVector> out;
  for (Eigen::Index c = 1; c < d; ++c) out.emplace_back(q.col(c));
  return out;
}

// Factors of the product form of a path amplitude:
//   A[i_1..i_K] = last(i_K) * prod_k transfer_k(i_{k+1}, i_k) * first(i_1)
struct AmplitudeFactors {
  CVector first;
  std::vector<CMatrix> transfer;
  CVector last;  // conjugated row <phi|U(T - t_K)|i_K>
  Complex direct;

  explicit AmplitudeFactors(const MeasurementChain& chain) {
    const auto& prop = chain.propagator();
    const auto& steps = chain.steps();
    const CVector& psi = chain.pre_state().amplitudes();
    const CVector& phi = chain.post_state().amplitudes();
    if (steps.empty()) {
      direct = phi.dot(prop.unitary(chain.final_time()) * psi);
      return;
    }
    first = steps.front().observable.eigenvectors().adjoint() * (prop.unitary(steps.front().time) * psi);
    for (std::size_t k = 1; k < steps.size(); ++k) {
      transfer.push_back(steps[k].observable.eigenvectors().adjoint() *
                         prop.unitary(steps[k].time - steps[k - 1].time) *
                         steps[k - 1].observable.eigenvectors());
    }
    last = (phi.adjoint() * prop.unitary(chain.final_time() - steps.back().time) *
            steps.back().observable.eigenvectors())
               .transpose();
  }

  Complex operator()(const std::vector<std::size_t>& idx) const {
    if (idx.empty()) return direct;
    Complex a = first(static_cast<Eigen::Index>(idx[0]));
    for (std::size_t k = 1; k < idx.size(); ++k) {
      a *= transfer[k - 1](static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(idx[k - 1]));
    }
    return a * last(static_cast<Eigen::Index>(idx.back()));
  }
};

void check_path(const MeasurementChain& chain, const VirtualPath& path) {
  if (path.indices.size() != chain.step_count()) {
    throw InvalidArgument(
        fmt::format("path has {} indices, chain has {} steps", path.indices.size(), chain.step_count()));
  }
  for (std::size_t i : path.indices) {
    if (i >= chain.dim()) {
      throw InvalidArgument(fmt::format("path index {} out of range for dim {}", i, chain.dim()));
    }
  }
}

}  // namespace

MeasurementChain::MeasurementChain(StateVector pre_state, std::vector<ChainStep> steps,
                                   Propagator propagator, double final_time, StateVector post_state,
                                   std::optional<std::vector<StateVector>> post_complement)
    : pre_(std::move(pre_state)),
      steps_(std::move(steps)),
      prop_(std::move(propagator)),
      final_time_(final_time),
      post_(std::move(post_state)) {
  const std::size_t d = pre_.dim();
  if (post_.dim() != d || prop_.dim() != d) {
    throw DimensionMismatch(fmt::format("chain dimension mismatch: pre {}, post {}, hamiltonian {}", d,
                                        post_.dim(), prop_.dim()));
  }
  if (!pre_.is_normalized()) throw InvalidArgument("pre-selected state is not normalized");
  if (!post_.is_normalized()) throw InvalidArgument("post-selected state is not normalized");
  if (!(std::isfinite(final_time_) && final_time_ > 0.0)) {
    throw InvalidArgument("final time must be positive");
  }
  double previous = 0.0;
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    const auto& s = steps_[k];
    if (s.observable.dim() != d) {
      throw DimensionMismatch(fmt::format("observable at step {} has dimension {}, expected {}", k,
                                          s.observable.dim(), d));
    }
    if (!(s.time > previous && s.time < final_time_)) {
      throw InvalidArgument(fmt::format("step {} time {} must lie in ({}, {}) and increase", k, s.time,
                                        previous, final_time_));
    }
    previous = s.time;
    if (path_count_ > kMaxPaths / d) {
      throw InvalidArgument(fmt::format("dim^K exceeds the path cap of {}", kMaxPaths));
    }
    path_count_ *= d;
  }

  if (post_complement) {
    if (post_complement->size() != d - 1) {
      throw InvalidArgument(
          fmt::format("post-selection completion needs {} states, got {}", d - 1, post_complement->size()));
    }
    CMatrix gram_basis(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    gram_basis.col(0) = post_.amplitudes();
    for (std::size_t m = 0; m < d - 1; ++m) {
      if ((*post_complement)[m].dim() != d) throw DimensionMismatch("completion state dimension");
      gram_basis.col(static_cast<Eigen::Index>(m + 1)) = (*post_complement)[m].amplitudes();
    }
    if (!is_unitary(gram_basis)) {
      throw InvalidArgument("post-selection completion is not orthonormal to the post-selected state");
    }
    completion_ = std::move(*post_complement);
    explicit_completion_ = true;
  } else {
    completion_ = householder_completion(post_);
  }
}

MeasurementChain MeasurementChain::with_post_state(const StateVector& post) const {
  return MeasurementChain(pre_, steps_, prop_, final_time_, post);
}

std::size_t path_rank(const MeasurementChain& chain, const VirtualPath& path) {
  check_path(chain, path);
  std::size_t rank = 0;
  for (std::size_t i : path.indices) rank = rank * chain.dim() + i;
  return rank;
}

VirtualPath path_at_rank(const MeasurementChain& chain, std::size_t rank) {
  if (rank >= chain.path_count()) {
    throw InvalidArgument(fmt::format("path rank {} out of range ({} paths)", rank, chain.path_count()));
  }
  VirtualPath p;
  p.indices.resize(chain.step_count());
  for (std::size_t k = chain.step_count(); k-- > 0;) {
    p.indices[k] = rank % chain.dim();
    rank /= chain.dim();
  }
  return p;
}

std::vector<VirtualPath> enumerate_paths(const MeasurementChain& chain) {
  std::vector<VirtualPath> out;
  out.reserve(chain.path_count());
  for (std::size_t r = 0; r < chain.path_count(); ++r) out.push_back(path_at_rank(chain, r));
  return out;
}

Complex path_amplitude(const MeasurementChain& chain, const VirtualPath& path) {
  check_path(chain, path);
  return AmplitudeFactors(chain)(path.indices);
}

std::vector<Complex> path_amplitudes(const MeasurementChain& chain, std::size_t threads) {
  const AmplitudeFactors factors(chain);
  std::vector<Complex> out(chain.path_count());
  parallel_for(
      out.size(),
      [&](std::size_t begin, std::size_t end) {
        VirtualPath p = path_at_rank(chain, begin);
        for (std::size_t r = begin; r < end; ++r) {
          out[r] = factors(p.indices);
          // lexicographic increment
          for (std::size_t k = p.indices.size(); k-- > 0;) {
            if (++p.indices[k] < chain.dim()) break;
            p.indices[k] = 0;
          }
        }
      },
      threads);
  return out;
}

Complex transition_amplitude(const MeasurementChain& chain) {
  return chain.post_state().amplitudes().dot(chain.propagator().unitary(chain.final_time()) *
                                              chain.pre_state().amplitudes());
}

PathFunctional PathFunctional::eigenvalue_at_step(std::size_t step) {
  return linear_combination({{step, 1.0}});
}

PathFunctional PathFunctional::linear_combination(std::vector<StepWeight> terms, double offset) {
  for (const auto& t : terms) {
    if (!std::isfinite(t.weight)) throw InvalidArgument("functional weights must be finite");
  }
  if (!std::isfinite(offset)) throw InvalidArgument("functional offset must be finite");
  PathFunctional f;
  f.kind_ = Kind::kLinear;
  f.terms_ = std::move(terms);
  f.offset_ = offset;
  return f;
}

PathFunctional PathFunctional::constant(double value) { return linear_combination({}, value); }

PathFunctional PathFunctional::indicator_of_path(VirtualPath path) {
  PathFunctional f;
  f.kind_ = Kind::kIndicator;
  f.indicated_ = std::move(path);
  return f;
}

PathFunctional PathFunctional::table(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("functional table values must be finite");
  }
  PathFunctional f;
  f.kind_ = Kind::kTable;
  f.table_ = std::move(values);
  return f;
}

void PathFunctional::validate(const MeasurementChain& chain) const {
  switch (kind_) {
    case Kind::kLinear:
      for (const auto& t : terms_) {
        if (t.step >= chain.step_count()) {
          throw InvalidArgument(
              fmt::format("functional refers to step {}, chain has {} steps", t.step, chain.step_count()));
        }
      }
      break;
    case Kind::kIndicator:
      check_path(chain, indicated_);
      break;
    case Kind::kTable:
      if (table_.size() != chain.path_count()) {
        throw InvalidArgument(
            fmt::format("functional table has {} values, chain has {} paths", table_.size(), chain.path_count()));
      }
      break;
  }
}

double PathFunctional::operator()(const MeasurementChain& chain, const VirtualPath& path) const {
  switch (kind_) {
    case Kind::kLinear: {
      double v = offset_;
      for (const auto& t : terms_) v += t.weight * chain.step(t.step).observable.eigenvalue(path.indices.at(t.step));
      return v;
    }
    case Kind::kIndicator:
      return path == indicated_ ? 1.0 : 0.0;
    case Kind::kTable:
      return table_.at(path_rank(chain, path));
  }
  return 0.0;
}

std::vector<double> PathFunctional::values(const MeasurementChain& chain) const {
  validate(chain);
  std::vector<double> out;
  out.reserve(chain.path_count());
  for (const auto& p : enumerate_paths(chain)) out.push_back((*this)(chain, p));
  return out;
}

Complex AmplitudeDistribution::total() const {
  Complex s = 0.0;
  for (const auto& a : amplitudes) s += a;
  return s;
}

AmplitudeDistribution group_amplitudes(std::span<const double> values, std::span<const Complex> amplitudes,
                                       double merge_tol) {
  if (merge_tol < 0.0 || std::isnan(merge_tol)) {
    throw InvalidArgument("merge tolerance must be non-negative");
  }
  if (values.size() != amplitudes.size()) {
    throw DimensionMismatch("functional values and amplitudes differ in length");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  AmplitudeDistribution dist;
  std::size_t i = 0;
  while (i < order.size()) {
    const double anchor = values[order[i]];
    std::size_t j = i;
    while (j < order.size() && values[order[j]] - anchor <= merge_tol) ++j;
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(i),
                                     order.begin() + static_cast<std::ptrdiff_t>(j));
    std::sort(members.begin(), members.end());
    Complex sum = 0.0;
    for (std::size_t m : members) sum += amplitudes[m];
    dist.support.push_back(anchor);
    dist.amplitudes.push_back(sum);
    i = j;
  }
  return dist;
}

AmplitudeDistribution amplitude_distribution(const MeasurementChain& chain, const PathFunctional& functional,
                                             double merge_tol) {
  const auto values = functional.values(chain);
  const auto amps = path_amplitudes(chain);
  return group_amplitudes(values, amps, merge_tol);
}

PathBundle PathBundle::of(const MeasurementChain& chain, const PathFunctional& functional,
                          const VirtualPath& path) {
  functional.validate(chain);
  return PathBundle(&chain, path_amplitude(chain, path), functional(chain, path));
}

PathBundle combine_paths(Complex alpha, const PathBundle& p, Complex beta, const PathBundle& q,
                         double merge_tol) {
  if (p.chain_ != q.chain_) {
    throw InvalidArgument("cannot combine paths from different chains");
  }
  std::optional<double> value;
  if (beta == 0.0) {
    value = p.value_;
  } else if (alpha == 0.0) {
    value = q.value_;
  } else if (p.value_ && q.value_ && std::abs(*p.value_ - *q.value_) <= merge_tol) {
    value = p.value_;
  }
  return PathBundle(p.chain_, alpha * p.amplitude_ + beta * q.amplitude_, value);
}

namespace {

Complex checked_total(const AmplitudeDistribution& dist) {
  const Complex total = dist.total();
  if (std::abs(total) <= kForbiddenThreshold) {
    throw ForbiddenTransition(fmt::format(
        "transition amplitude |<phi|U(T)|psi>| = {:.3g} is at or below {:.0e}; weak values diverge. "
        "Choose a post-selected state with non-vanishing overlap.",
        std::abs(total), kForbiddenThreshold));
  }
  return total;
}

}  // namespace

std::vector<RelativeAmplitude> relative_amplitudes(const AmplitudeDistribution& dist) {
  const Complex total = checked_total(dist);
  std::vector<RelativeAmplitude> out;
  out.reserve(dist.size());
  for (std::size_t m = 0; m < dist.size(); ++m) out.push_back({dist.support[m], dist.amplitudes[m] / total});
  return out;
}

std::vector<RelativeAmplitude> relative_amplitudes(const MeasurementChain& chain,
                                                   const PathFunctional& functional) {
  return relative_amplitudes(amplitude_distribution(chain, functional));
}

Complex weak_value(const AmplitudeDistribution& dist) {
  const Complex total = checked_total(dist);
  Complex num = 0.0;
  for (std::size_t m = 0; m < dist.size(); ++m) num += dist.support[m] * dist.amplitudes[m];
  return num / total;
}

Complex weak_value(const MeasurementChain& chain, const PathFunctional& functional) {
  return weak_value(amplitude_distribution(chain, functional));
}

double strong_mean(const AmplitudeDistribution& dist) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < dist.size(); ++m) {
    const double p = std::norm(dist.amplitudes[m]);
    num += dist.support[m] * p;
    den += p;
  }
  if (den <= kForbiddenThreshold * kForbiddenThreshold) {
    throw ZeroProbability("all grouped amplitudes vanish; the strong mean is undefined");
  }
  return num / den;
}

double strong_mean(const MeasurementChain& chain, const PathFunctional& functional) {
  return strong_mean(amplitude_distribution(chain, functional));
}

}  // namespace qpathnet
