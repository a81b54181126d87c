#pragma once

// Finite-dimensional states, observables and unitary evolution.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace qpathnet {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

// Construction-level tolerance (normalization, hermiticity).
inline constexpr double kConstructionTol = 1e-12;
// Tolerance for identities derived through arithmetic (unitarity, sum rules).
inline constexpr double kIdentityTol = 1e-10;

// A pure state in C^dim, dim >= 2. Need not be normalized; use
// is_normalized() where a normalized state is required.
class StateVector {
 public:
  explicit StateVector(CVector amplitudes);

  static StateVector normalized(CVector amplitudes);
  static StateVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  double norm_squared() const { return amps_.squaredNorm(); }
  bool is_normalized(double tol = kConstructionTol) const;
  StateVector normalize() const;

  // <this|other>
  Complex inner(const StateVector& other) const;

 private:
  CVector amps_;
};

// Eigen-projector onto one distinct eigenvalue (degenerate eigenvectors grouped).
struct SpectralProjector {
  double eigenvalue;
  CMatrix projector;
};

// Hermitian operator together with its orthonormal eigenbasis. Eigenvector
// columns carry the phase convention "first nonzero component real positive".
class Observable {
 public:
  // Eigenpairs ordered by ascending eigenvalue.
  static Observable from_matrix(const CMatrix& matrix);
  // Keeps the given column order, so eigenvector k is path index k.
  static Observable from_basis(const CMatrix& eigenvectors, const RVector& eigenvalues);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const CMatrix& matrix() const { return matrix_; }
  const RVector& eigenvalues() const { return values_; }
  const CMatrix& eigenvectors() const { return vectors_; }
  double eigenvalue(std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }
  CVector eigenvector(std::size_t i) const { return vectors_.col(static_cast<Eigen::Index>(i)); }

  double expectation(const StateVector& state) const;
  std::vector<SpectralProjector> spectral_projectors(double merge_tol = 1e-9) const;

 private:
  Observable(CMatrix matrix, RVector values, CMatrix vectors);

  CMatrix matrix_;
  RVector values_;
  CMatrix vectors_;
};

// U(t) = exp(-iHt) with hbar = 1, built from the spectral decomposition of H.
class Propagator {
 public:
  explicit Propagator(const CMatrix& hamiltonian);
  static Propagator zero(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(hamiltonian_.rows()); }
  const CMatrix& hamiltonian() const { return hamiltonian_; }
  bool is_zero() const { return zero_; }

  CMatrix unitary(double t) const;

 private:
  CMatrix hamiltonian_;
  RVector energies_;
  CMatrix modes_;
  bool zero_ = false;
};

bool is_hermitian(const CMatrix& m, double rel_tol = kConstructionTol);
bool is_unitary(const CMatrix& m, double tol = kIdentityTol);
bool commute(const Observable& a, const Observable& b, double tol = kIdentityTol);

StateVector evolve(const StateVector& state, const Propagator& prop, double t);

struct UncertaintyBound {
  double lhs;  // sigma_A * sigma_B
  double rhs;  // |<[A,B]>| / 2
};

UncertaintyBound robertson_check(const StateVector& state, const Observable& a, const Observable& b);

// One row per distinct eigenvalue of B.
struct DisturbanceRow {
  double outcome;
  double p_disturbed;    // an accurate A measurement at t_mid precedes B at T
  double p_undisturbed;  // B alone at T
};

std::vector<DisturbanceRow> disturbance_gap(const StateVector& psi, const Observable& a,
                                            const Observable& b, const Propagator& prop,
                                            double t_mid, double final_time);

}  // namespace qpathnet
