// Copyright 2026 The dicke-squeeze Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hilbert.hpp: symmetric spin-N/2 sector tensored with a truncated Fock
// space. Basis |N/2,m> (x) |n>, m ascending from -N/2 (outer index), n
// ascending from 0 (inner index).

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "dicke/common.hpp"

namespace dicke {

class SpaceDims {
 public:
  SpaceDims(int n_atoms, int fock_cutoff) : n_atoms_(n_atoms), fock_cutoff_(fock_cutoff) {
    detail::require(n_atoms >= 1, "SpaceDims: n_atoms must be >= 1");
    detail::require(fock_cutoff >= 1, "SpaceDims: fock_cutoff must be >= 1");
  }

  int n_atoms() const { return n_atoms_; }
  int fock_cutoff() const { return fock_cutoff_; }
  int spin_dim() const { return n_atoms_ + 1; }
  int fock_dim() const { return fock_cutoff_ + 1; }
  int total_dim() const { return spin_dim() * fock_dim(); }
  double spin() const { return 0.5 * n_atoms_; }

  /// Offset m + N/2 of a magnetic quantum number; throws unless it is an
  /// integer in [0, N].
  int spin_index(double m) const {
    const double k = m + spin();
    const double k_round = std::round(k);
    if (std::abs(k - k_round) > 1e-9 || k_round < 0 || k_round > n_atoms_) {
      throw InvalidArgument("magnetic number m=" + std::to_string(m) + " invalid for N=" +
                            std::to_string(n_atoms_));
    }
    return static_cast<int>(k_round);
  }

  int index(double m, int n) const {
    if (n < 0 || n > fock_cutoff_) {
      throw InvalidArgument("photon number n=" + std::to_string(n) + " outside [0, " +
                            std::to_string(fock_cutoff_) + "]");
    }
    return spin_index(m) * fock_dim() + n;
  }

  double m_of(int index) const { return index / fock_dim() - spin(); }
  int n_of(int index) const { return index % fock_dim(); }

  friend bool operator==(const SpaceDims&, const SpaceDims&) = default;

 private:
  int n_atoms_;
  int fock_cutoff_;
};

/// Sparse complex operator on the composite space.
class Operator {
 public:
  Operator(SpaceDims dims, SparseMat matrix, bool hermitian = false)
      : dims_(dims), matrix_(std::move(matrix)), hermitian_(hermitian) {
    const int d = dims_.total_dim();
    if (matrix_.rows() != d || matrix_.cols() != d) {
      throw InvalidArgument("Operator: matrix is " + std::to_string(matrix_.rows()) + "x" +
                            std::to_string(matrix_.cols()) + ", expected " + std::to_string(d));
    }
    matrix_.makeCompressed();
    if (hermitian_) {
      const SparseMat diff = matrix_ - SparseMat(matrix_.adjoint());
      const double scale = std::max(1.0, matrix_.norm());
      if (diff.norm() > 1e-12 * scale) throw InvalidArgument("Operator flagged Hermitian is not");
    }
  }

  const SpaceDims& dims() const { return dims_; }
  const SparseMat& matrix() const { return matrix_; }
  bool hermitian() const { return hermitian_; }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }

 private:
  SpaceDims dims_;
  SparseMat matrix_;
  bool hermitian_;
};

class StateVector {
 public:
  StateVector(SpaceDims dims, Eigen::VectorXcd amplitudes, bool normalized = true)
      : dims_(dims), amplitudes_(std::move(amplitudes)), normalized_(normalized) {
    if (amplitudes_.size() != dims_.total_dim()) {
      throw InvalidArgument("StateVector: length " + std::to_string(amplitudes_.size()) +
                            " != total_dim " + std::to_string(dims_.total_dim()));
    }
    if (normalized_ && std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-10) {
      throw InvalidArgument("StateVector: not normalized (norm^2 = " +
                            std::to_string(amplitudes_.squaredNorm()) + ")");
    }
  }

  const SpaceDims& dims() const { return dims_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  bool normalized() const { return normalized_; }
  double norm() const { return amplitudes_.norm(); }

  StateVector normalized_copy() const {
    const double nrm = amplitudes_.norm();
    if (!(nrm > 0.0)) throw NumericalError("cannot normalize a zero state");
    return StateVector(dims_, amplitudes_ / nrm, true);
  }

 private:
  SpaceDims dims_;
  Eigen::VectorXcd amplitudes_;
  bool normalized_;
};

/// Mixed state on the composite space. Validity (Hermitian, unit trace,
/// positive) is checked by validate(), not on construction.
class DensityMatrix {
 public:
  DensityMatrix(SpaceDims dims, Eigen::MatrixXcd entries) : dims_(dims), entries_(std::move(entries)) {
    const int d = dims_.total_dim();
    if (entries_.rows() != d || entries_.cols() != d) {
      throw InvalidArgument("DensityMatrix: wrong shape");
    }
  }

  static DensityMatrix pure(const StateVector& psi) {
    const auto& v = psi.amplitudes();
    return DensityMatrix(psi.dims(), v * v.adjoint() / v.squaredNorm());
  }

  const SpaceDims& dims() const { return dims_; }
  const Eigen::MatrixXcd& entries() const { return entries_; }

  void validate(double tol = 1e-10, double eig_floor = -1e-8) const {
    if ((entries_ - entries_.adjoint()).norm() > tol) throw NumericalError("density matrix not Hermitian");
    if (std::abs(entries_.trace() - 1.0) > tol) throw NumericalError("density matrix trace != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < eig_floor) throw NumericalError("density matrix not positive");
  }

 private:
  SpaceDims dims_;
  Eigen::MatrixXcd entries_;
};

// --- factor operators --------------------------------------------------------

struct SpinOperators {
  SparseMat sz, sp, sm, sx, sy;
};

struct FockOperators {
  SparseMat a, a_dag, n;
};

inline SpinOperators spin_operators(int n_atoms) {
  detail::require(n_atoms >= 1, "spin_operators: N must be >= 1 (empty ensemble)");
  const int dim = n_atoms + 1;
  const double s = 0.5 * n_atoms;
  std::vector<Eigen::Triplet<cplx>> tz, tp;
  for (int k = 0; k < dim; ++k) {
    const double m = k - s;
    tz.emplace_back(k, k, m);
    if (k + 1 < dim) tp.emplace_back(k + 1, k, std::sqrt(s * (s + 1.0) - m * (m + 1.0)));
  }
  SpinOperators ops;
  ops.sz.resize(dim, dim);
  ops.sz.setFromTriplets(tz.begin(), tz.end());
  ops.sp.resize(dim, dim);
  ops.sp.setFromTriplets(tp.begin(), tp.end());
  ops.sm = ops.sp.adjoint();
  ops.sx = 0.5 * (ops.sp + ops.sm);
  ops.sy = (ops.sp - ops.sm) * cplx(0.0, -0.5);
  return ops;
}

inline FockOperators fock_operators(int n_max) {
  detail::require(n_max >= 1, "fock_operators: n_max must be >= 1");
  const int dim = n_max + 1;
  std::vector<Eigen::Triplet<cplx>> ta, tn;
  for (int n = 0; n < dim; ++n) {
    tn.emplace_back(n, n, static_cast<double>(n));
    if (n >= 1) ta.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  }
  FockOperators ops;
  ops.a.resize(dim, dim);
  ops.a.setFromTriplets(ta.begin(), ta.end());
  ops.a_dag = ops.a.adjoint();
  ops.n.resize(dim, dim);
  ops.n.setFromTriplets(tn.begin(), tn.end());
  return ops;
}

inline SparseMat sparse_identity(int dim) {
  SparseMat id(dim, dim);
  id.setIdentity();
  return id;
}

// --- embedding ---------------------------------------------------------------

struct identity_t {};
inline constexpr identity_t identity{};

inline Operator embed(const SpaceDims& dims, const SparseMat& spin, const SparseMat& fock) {
  if (spin.rows() != dims.spin_dim() || spin.cols() != dims.spin_dim()) {
    throw InvalidArgument("embed: spin factor is " + std::to_string(spin.rows()) + "x" +
                          std::to_string(spin.cols()) + ", expected " + std::to_string(dims.spin_dim()));
  }
  if (fock.rows() != dims.fock_dim() || fock.cols() != dims.fock_dim()) {
    throw InvalidArgument("embed: Fock factor is " + std::to_string(fock.rows()) + "x" +
                          std::to_string(fock.cols()) + ", expected " + std::to_string(dims.fock_dim()));
  }
  SparseMat out = Eigen::kroneckerProduct(spin, fock);
  return Operator(dims, std::move(out));
}

inline Operator embed(const SpaceDims& dims, const SparseMat& spin, identity_t) {
  return embed(dims, spin, sparse_identity(dims.fock_dim()));
}

inline Operator embed(const SpaceDims& dims, identity_t, const SparseMat& fock) {
  return embed(dims, sparse_identity(dims.spin_dim()), fock);
}

inline Operator embed(const SpaceDims& dims, identity_t, identity_t) {
  return Operator(dims, sparse_identity(dims.total_dim()), true);
}

/// All single-factor operators lifted to the composite space.
struct SystemOperators {
  explicit SystemOperators(const SpaceDims& d)
      : dims(d),
        spin(spin_operators(d.n_atoms())),
        fock(fock_operators(d.fock_cutoff())),
        sz(embed(d, spin.sz, identity).matrix()),
        sx(embed(d, spin.sx, identity).matrix()),
        sy(embed(d, spin.sy, identity).matrix()),
        sp(embed(d, spin.sp, identity).matrix()),
        sm(embed(d, spin.sm, identity).matrix()),
        a(embed(d, identity, fock.a).matrix()),
        a_dag(embed(d, identity, fock.a_dag).matrix()),
        n(embed(d, identity, fock.n).matrix()) {}

  SpaceDims dims;
  SpinOperators spin;
  FockOperators fock;
  SparseMat sz, sx, sy, sp, sm, a, a_dag, n;
};

// --- canonical states --------------------------------------------------------

inline StateVector product_state(const SpaceDims& dims, double m, int n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dims.total_dim());
  v(dims.index(m, n)) = 1.0;
  return StateVector(dims, std::move(v));
}

inline StateVector dicke_state(const SpaceDims& dims, double m) { return product_state(dims, m, 0); }

/// Fock state |n> with the spin factor in |N/2, -N/2>.
inline StateVector fock_state(const SpaceDims& dims, int n) { return product_state(dims, -dims.spin(), n); }

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Coherent spin state amplitudes on the spin factor, indexed by m + N/2.
/// eta = exp(-i phi) tan(theta/2); eta = 0 is the south pole |N/2,-N/2>.
inline Eigen::VectorXcd css_state(int n_atoms, cplx eta) {
  detail::require(n_atoms >= 1, "css_state: N must be >= 1");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_atoms + 1);
  const double r = std::abs(eta);
  if (r == 0.0) {
    v(0) = 1.0;
    return v;
  }
  const double phase = std::arg(eta);
  const double log_r = std::log(r);
  const double log_pref = -0.5 * n_atoms * std::log1p(r * r);
  for (int k = 0; k <= n_atoms; ++k) {
    const double log_amp = log_pref + 0.5 * log_binomial(n_atoms, k) + k * log_r;
    v(k) = std::polar(std::exp(log_amp), k * phase);
  }
  return v;
}

/// spin_amplitudes (x) |0>.
inline StateVector with_vacuum(const SpaceDims& dims, const Eigen::VectorXcd& spin_amplitudes) {
  if (spin_amplitudes.size() != dims.spin_dim()) throw InvalidArgument("with_vacuum: wrong spin dimension");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dims.total_dim());
  for (int k = 0; k < dims.spin_dim(); ++k) v(k * dims.fock_dim()) = spin_amplitudes(k);
  const bool unit = std::abs(v.squaredNorm() - 1.0) <= 1e-10;
  return StateVector(dims, std::move(v), unit);
}

// --- expectation values ------------------------------------------------------

inline cplx expectation(const Operator& op, const StateVector& psi) {
  if (!(op.dims() == psi.dims())) throw InvalidArgument("expectation: dimension mismatch");
  const auto& v = psi.amplitudes();
  return v.dot(op.matrix() * v);
}

inline cplx expectation(const Operator& op, const DensityMatrix& rho) {
  if (!(op.dims() == rho.dims())) throw InvalidArgument("expectation: dimension mismatch");
  return (op.matrix() * rho.entries()).trace();
}

}  // namespace dicke
