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

// model.hpp: generalized Dicke Hamiltonian
//
//   H = w0 Sz + w a^dag a + (lambda/sqrt(N)) (a + a^dag)(S+ + S-) + (U/N) Sz a^dag a
//
// with cavity damping kappa D[a], D[a]rho = 2 a rho a^dag - a^dag a rho - rho a^dag a.
// The matching quantum-jump unraveling uses the jump operator sqrt(2 kappa) a
// and H_eff = H - i kappa a^dag a. All frequencies are in units of kappa.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dicke/hilbert.hpp"

namespace dicke {

struct ModelParams {
  int N{10};
  double omega{1.0};
  double omega0{0.2};
  double lambda{0.1};
  double U{1000.0};
  double kappa{1.0};
  int n_max{6};

  void validate() const {
    detail::require(N >= 1, "ModelParams: N must be >= 1");
    detail::require(n_max >= 1, "ModelParams: n_max must be >= 1");
    detail::require(std::isfinite(omega) && std::isfinite(omega0) && std::isfinite(lambda) &&
                        std::isfinite(U) && std::isfinite(kappa),
                    "ModelParams: frequencies must be finite");
    detail::require(kappa > 0.0, "ModelParams: kappa must be > 0");
  }

  SpaceDims dims() const { return SpaceDims(N, n_max); }
};

/// Time dependence of the effective cavity frequency omega.
class OmegaProtocol {
 public:
  enum class Kind { constant, linear_ramp, discrete_step };

  static OmegaProtocol constant(double omega) {
    OmegaProtocol p;
    p.kind_ = Kind::constant;
    p.c0_ = omega;
    return p;
  }

  /// omega(t) = start - rate * t for t < t_end, held at omega(t_end) afterwards.
  static OmegaProtocol linear_ramp(double start, double rate,
                                   double t_end = std::numeric_limits<double>::infinity()) {
    detail::require(std::isfinite(start) && std::isfinite(rate), "linear_ramp: non-finite coefficient");
    detail::require(t_end > 0.0, "linear_ramp: t_end must be > 0");
    OmegaProtocol p;
    p.kind_ = Kind::linear_ramp;
    p.c0_ = start;
    p.c1_ = rate;
    p.t_end_ = t_end;
    return p;
  }

  /// Ramp from `start` down to `end_value` at `rate` > 0, then hold.
  static OmegaProtocol linear_ramp_to(double start, double end_value, double rate) {
    detail::require(rate > 0.0 && start > end_value, "linear_ramp_to: need start > end and rate > 0");
    return linear_ramp(start, rate, (start - end_value) / rate);
  }

  /// omega = -(U/N)(-N/2 + j) during t_h (j-1) <= t < t_h j, j = 1..delta_m.
  /// Step j makes |N/2,-N/2+j-1,0> -> |N/2,-N/2+j,1> resonant.
  static OmegaProtocol discrete_step(double hold_time, int delta_m, double U, int N) {
    detail::require(hold_time > 0.0, "discrete_step: hold time must be > 0");
    detail::require(delta_m >= 1, "discrete_step: step count must be >= 1");
    detail::require(N >= 1 && delta_m <= N, "discrete_step: step count must be in [1, N]");
    OmegaProtocol p;
    p.kind_ = Kind::discrete_step;
    p.t_h_ = hold_time;
    p.delta_m_ = delta_m;
    p.U_ = U;
    p.N_ = N;
    return p;
  }

  Kind kind() const { return kind_; }
  double hold_time() const { return t_h_; }
  int step_count() const { return delta_m_; }
  double ramp_start() const { return c0_; }
  double ramp_rate() const { return c1_; }
  double ramp_end() const { return t_end_; }

  /// Natural end of the schedule (inf for constant or open ramps).
  double schedule_end() const {
    switch (kind_) {
      case Kind::constant: return std::numeric_limits<double>::infinity();
      case Kind::linear_ramp: return t_end_;
      case Kind::discrete_step: return t_h_ * delta_m_;
    }
    return 0.0;
  }

  int step_index(double t) const {
    const int j = static_cast<int>(std::floor(t / t_h_)) + 1;
    return std::clamp(j, 1, delta_m_);
  }

  double step_omega(int j) const { return -(U_ / N_) * (-0.5 * N_ + j); }

  /// Value at time t >= 0. Times past the schedule end return the final value.
  double omega_at(double t) const {
    detail::require(t >= 0.0, "omega_at: t must be >= 0");
    switch (kind_) {
      case Kind::constant: return c0_;
      case Kind::linear_ramp: return c0_ - c1_ * std::min(t, t_end_);
      case Kind::discrete_step: return step_omega(step_index(t));
    }
    return 0.0;
  }

  bool piecewise_constant() const { return kind_ != Kind::linear_ramp; }

  /// Times in (0, t_max) where omega jumps or has a kink; integrators
  /// restart there.
  std::vector<double> breakpoints(double t_max) const {
    std::vector<double> out;
    if (kind_ == Kind::discrete_step) {
      for (int j = 1; j < delta_m_; ++j) {
        if (j * t_h_ < t_max) out.push_back(j * t_h_);
      }
    } else if (kind_ == Kind::linear_ramp && t_end_ < t_max) {
      out.push_back(t_end_);
    }
    return out;
  }

 private:
  Kind kind_{Kind::constant};
  double c0_{0.0};
  double c1_{0.0};
  double t_end_{std::numeric_limits<double>::infinity()};
  double t_h_{1.0};
  int delta_m_{1};
  double U_{0.0};
  int N_{1};
};

inline double omega_at(const OmegaProtocol& protocol, double t) { return protocol.omega_at(t); }

/// Cavity frequency that makes all |N/2,m_target,n> degenerate: U = -omega N / m.
inline double resonant_omega(double U, int N, double m_target) {
  detail::require(N >= 1, "resonant_omega: N must be >= 1");
  return -U * m_target / N;
}

inline Operator build_hamiltonian(const ModelParams& p) {
  p.validate();
  const SpaceDims dims = p.dims();
  const SpinOperators s = spin_operators(p.N);
  const FockOperators f = fock_operators(p.n_max);
  const SparseMat sx2 = s.sp + s.sm;
  const SparseMat x = f.a + f.a_dag;
  SparseMat h = p.omega0 * embed(dims, s.sz, identity).matrix();
  h += p.omega * embed(dims, identity, f.n).matrix();
  h += (p.lambda / std::sqrt(static_cast<double>(p.N))) * embed(dims, sx2, x).matrix();
  h += (p.U / p.N) * embed(dims, s.sz, f.n).matrix();
  h.prune(cplx(0.0));
  return Operator(dims, std::move(h), true);
}

inline Operator build_effective_hamiltonian(const ModelParams& p) {
  const Operator h = build_hamiltonian(p);
  const SpaceDims dims = p.dims();
  const FockOperators f = fock_operators(p.n_max);
  SparseMat heff = h.matrix() - kI * p.kappa * embed(dims, identity, f.n).matrix();
  return Operator(dims, std::move(heff), false);
}

/// Superoperator acting on column-major vec(rho).
struct Liouvillian {
  SpaceDims dims;
  SparseMatCol generator;

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const {
    const int d = dims.total_dim();
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), static_cast<Eigen::Index>(d) * d);
    Eigen::VectorXcd out = generator * v;
    return Eigen::Map<Eigen::MatrixXcd>(out.data(), d, d);
  }
};

struct LiouvillianOptions {
  int max_total_dim{512};
};

inline Liouvillian build_liouvillian(const ModelParams& p, const LiouvillianOptions& opt = {}) {
  p.validate();
  const SpaceDims dims = p.dims();
  const int d = dims.total_dim();
  if (d > opt.max_total_dim) {
    throw CapacityError("Liouvillian: total_dim " + std::to_string(d) + " exceeds ceiling " +
                        std::to_string(opt.max_total_dim));
  }
  const SparseMatCol h(build_hamiltonian(p).matrix());
  const FockOperators f = fock_operators(p.n_max);
  const SparseMatCol a(embed(dims, identity, f.a).matrix());
  const SparseMatCol n(embed(dims, identity, f.n).matrix());
  SparseMatCol id(d, d);
  id.setIdentity();
  // vec(A X B) = (B^T (x) A) vec(X)
  SparseMatCol l = -kI * (SparseMatCol(Eigen::kroneckerProduct(id, h)) -
                          SparseMatCol(Eigen::kroneckerProduct(SparseMatCol(h.transpose()), id)));
  l += (2.0 * p.kappa) * SparseMatCol(Eigen::kroneckerProduct(SparseMatCol(a.conjugate()), a));
  l -= p.kappa * SparseMatCol(Eigen::kroneckerProduct(id, n));
  l -= p.kappa * SparseMatCol(Eigen::kroneckerProduct(SparseMatCol(n.transpose()), id));
  l.prune(cplx(0.0));
  l.makeCompressed();
  return Liouvillian{dims, std::move(l)};
}

}  // namespace dicke
