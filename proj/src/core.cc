#include "qpathnet/core.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qpathnet/errors.h"

namespace qpathnet {

namespace {

void fix_phases(CMatrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const Complex z = vectors(r, c);
      if (std::abs(z) > kConstructionTol) {
        vectors.col(c) *= std::conj(z) / std::abs(z);
        vectors(r, c) = std::abs(z);
        break;
      }
    }
  }
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(fmt::format("{}: dimension {} vs {}", what, a, b));
  }
}

}  // namespace

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 2) {
    throw InvalidArgument(fmt::format("state dimension must be >= 2, got {}", amps_.size()));
  }
  if (!amps_.allFinite()) {
    throw InvalidArgument("state amplitudes must be finite");
  }
}

StateVector StateVector::normalized(CVector amplitudes) {
  return StateVector(std::move(amplitudes)).normalize();
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) {
    throw InvalidArgument(fmt::format("basis index {} out of range for dim {}", index, dim));
  }
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(v));
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm_squared() - 1.0) <= tol; }

StateVector StateVector::normalize() const {
  const double n = amps_.norm();
  if (n == 0.0) {
    throw InvalidArgument("cannot normalize the zero vector");
  }
  return StateVector(amps_ / n);
}

Complex StateVector::inner(const StateVector& other) const {
  require_same_dim(dim(), other.dim(), "inner product");
  return amps_.dot(other.amps_);
}

bool is_hermitian(const CMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= rel_tol * m.norm();
}

bool is_unitary(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).norm() <= tol;
}

Observable::Observable(CMatrix matrix, RVector values, CMatrix vectors)
    : matrix_(std::move(matrix)), values_(std::move(values)), vectors_(std::move(vectors)) {}

Observable Observable::from_matrix(const CMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw DimensionMismatch(fmt::format("observable matrix is {}x{}", matrix.rows(), matrix.cols()));
  }
  if (matrix.rows() < 2) {
    throw InvalidArgument("observable dimension must be >= 2");
  }
  if (!is_hermitian(matrix)) {
    throw NotHermitian("observable not Hermitian");
  }
  // Solve on the exactly symmetrized matrix so round-off asymmetry never leaks
  // into the eigenvectors.
  const CMatrix sym = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error("eigendecomposition failed");
  }
  CMatrix vectors = solver.eigenvectors();
  fix_phases(vectors);
  return Observable(sym, solver.eigenvalues(), std::move(vectors));
}

Observable Observable::from_basis(const CMatrix& eigenvectors, const RVector& eigenvalues) {
  if (eigenvectors.rows() != eigenvectors.cols() || eigenvectors.cols() != eigenvalues.size()) {
    throw DimensionMismatch("basis and eigenvalue count disagree");
  }
  if (eigenvectors.rows() < 2) {
    throw InvalidArgument("observable dimension must be >= 2");
  }
  if (!eigenvalues.allFinite()) {
    throw InvalidArgument("eigenvalues must be finite");
  }
  if (!is_unitary(eigenvectors)) {
    throw InvalidArgument("eigenbasis is not orthonormal");
  }
  CMatrix vectors = eigenvectors;
  fix_phases(vectors);
  CMatrix matrix = vectors * eigenvalues.cast<Complex>().asDiagonal() * vectors.adjoint();
  return Observable(std::move(matrix), eigenvalues, std::move(vectors));
}

double Observable::expectation(const StateVector& state) const {
  require_same_dim(dim(), state.dim(), "expectation");
  return state.amplitudes().dot(matrix_ * state.amplitudes()).real();
}

std::vector<SpectralProjector> Observable::spectral_projectors(double merge_tol) const {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values_.size()));
  for (Eigen::Index i = 0; i < values_.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return values_(x) < values_(y); });

  std::vector<SpectralProjector> out;
  for (Eigen::Index idx : order) {
    const CVector v = vectors_.col(idx);
    if (!out.empty() && std::abs(values_(idx) - out.back().eigenvalue) <= merge_tol) {
      out.back().projector += v * v.adjoint();
    } else {
      out.push_back({values_(idx), v * v.adjoint()});
    }
  }
  return out;
}

bool commute(const Observable& a, const Observable& b, double tol) {
  require_same_dim(a.dim(), b.dim(), "commutator");
  const CMatrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  const double scale = std::max(1.0, a.matrix().norm() * b.matrix().norm());
  return c.norm() <= tol * scale;
}

Propagator::Propagator(const CMatrix& hamiltonian) : hamiltonian_(hamiltonian) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw DimensionMismatch("hamiltonian must be square");
  }
  if (!is_hermitian(hamiltonian)) {
    throw NotHermitian("hamiltonian not Hermitian");
  }
  zero_ = hamiltonian.isZero(0.0);
  if (!zero_) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (hamiltonian + hamiltonian.adjoint()));
    if (solver.info() != Eigen::Success) {
      throw Error("hamiltonian eigendecomposition failed");
    }
    energies_ = solver.eigenvalues();
    modes_ = solver.eigenvectors();
  }
}

Propagator Propagator::zero(std::size_t dim) {
  return Propagator(CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

CMatrix Propagator::unitary(double t) const {
  if (!std::isfinite(t)) {
    throw InvalidArgument("evolution time must be finite");
  }
  if (zero_ || t == 0.0) {
    return CMatrix::Identity(hamiltonian_.rows(), hamiltonian_.cols());
  }
  CVector phases(energies_.size());
  for (Eigen::Index k = 0; k < energies_.size(); ++k) {
    phases(k) = std::exp(Complex(0.0, -energies_(k) * t));
  }
  return modes_ * phases.asDiagonal() * modes_.adjoint();
}

StateVector evolve(const StateVector& state, const Propagator& prop, double t) {
  require_same_dim(state.dim(), prop.dim(), "evolve");
  if (prop.is_zero()) return state;
  return StateVector(prop.unitary(t) * state.amplitudes());
}

UncertaintyBound robertson_check(const StateVector& state, const Observable& a, const Observable& b) {
  require_same_dim(state.dim(), a.dim(), "robertson_check");
  require_same_dim(state.dim(), b.dim(), "robertson_check");
  const CVector& s = state.amplitudes();
  auto variance = [&](const CMatrix& m) {
    const CVector ms = m * s;
    const double mean = s.dot(ms).real();
    return (ms - mean * s).squaredNorm();
  };
  const CMatrix comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  return {std::sqrt(variance(a.matrix()) * variance(b.matrix())), std::abs(s.dot(comm * s)) / 2.0};
}

std::vector<DisturbanceRow> disturbance_gap(const StateVector& psi, const Observable& a,
                                            const Observable& b, const Propagator& prop,
                                            double t_mid, double final_time) {
  require_same_dim(psi.dim(), a.dim(), "disturbance_gap");
  require_same_dim(psi.dim(), b.dim(), "disturbance_gap");
  require_same_dim(psi.dim(), prop.dim(), "disturbance_gap");
  if (!(0.0 < t_mid && t_mid < final_time)) {
    throw InvalidArgument(fmt::format("need 0 < t_mid < T, got t_mid={} T={}", t_mid, final_time));
  }
  const CMatrix u_first = prop.unitary(t_mid);
  const CMatrix u_second = prop.unitary(final_time - t_mid);
  const CVector undisturbed = prop.unitary(final_time) * psi.amplitudes();
  const CVector at_mid = u_first * psi.amplitudes();

  const auto a_proj = a.spectral_projectors();
  std::vector<CVector> branches;
  branches.reserve(a_proj.size());
  for (const auto& pa : a_proj) branches.push_back(u_second * (pa.projector * at_mid));

  std::vector<DisturbanceRow> rows;
  for (const auto& pb : b.spectral_projectors()) {
    DisturbanceRow row{pb.eigenvalue, 0.0, (pb.projector * undisturbed).squaredNorm()};
    for (const auto& branch : branches) row.p_disturbed += (pb.projector * branch).squaredNorm();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qpathnet
