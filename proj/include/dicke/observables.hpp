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

#pragma once

#include <algorithm>
#include <cmath>

#include "dicke/hilbert.hpp"

namespace dicke {

/// Lower bound ceil(1/xi - 2) on the entanglement depth, clamped at zero.
/// A 1e-9 slack absorbs rounding so that xi = 1/(k+2) maps to k.
inline int depth_bound(double xi_D) {
  detail::require(xi_D > 0.0 && std::isfinite(xi_D), "depth_bound: xi_D must be positive");
  const double x = 1.0 / xi_D - 2.0;
  return std::max(0, static_cast<int>(std::ceil(x - 1e-9)));
}

struct SteadyObservables {
  double photon_number{0};
  double inversion{0};
  double sz_variance{0};
  double transverse{0};
  double xi_D{0};
  int depth_bound{0};
  double top_fock_population{0};
};

namespace detail {

inline SteadyObservables from_moments(int N, double n, double sz, double sz2, double transverse, double top) {
  if (!(transverse > 0.0)) throw NumericalError("observables: <Sx^2+Sy^2> must be > 0");
  SteadyObservables o;
  o.photon_number = n;
  o.inversion = sz;
  o.sz_variance = sz2 - sz * sz;
  o.transverse = transverse;
  o.xi_D = N * (o.sz_variance + 0.25) / transverse;
  o.depth_bound = dicke::depth_bound(o.xi_D);
  o.top_fock_population = top;
  return o;
}

}  // namespace detail

inline SteadyObservables observables(const DensityMatrix& rho) {
  const SpaceDims& dims = rho.dims();
  const SystemOperators ops(dims);
  const auto& r = rho.entries();
  const double tr = r.trace().real();
  auto ev = [&](const SparseMat& op) { return (op * r).trace().real() / tr; };
  const SparseMat transverse = ops.sx * ops.sx + ops.sy * ops.sy;
  double top = 0.0;
  for (int k = 0; k < dims.spin_dim(); ++k) {
    const int i = k * dims.fock_dim() + dims.fock_cutoff();
    top += r(i, i).real();
  }
  return detail::from_moments(dims.n_atoms(), ev(ops.n), ev(ops.sz), ev(ops.sz * ops.sz), ev(transverse),
                              top / tr);
}

/// Same quantities for a pure state; the state need not be normalized.
/// All moments are diagonal in the product basis, with
/// Sx^2 + Sy^2 = S(S+1) - Sz^2 on the symmetric sector.
inline SteadyObservables observables(const StateVector& psi) {
  const SpaceDims& dims = psi.dims();
  const auto& v = psi.amplitudes();
  const double norm2 = v.squaredNorm();
  if (!(norm2 > 0.0)) throw NumericalError("observables: zero state");
  const double s = dims.spin();
  double n = 0, sz = 0, sz2 = 0, top = 0;
  for (int i = 0; i < dims.total_dim(); ++i) {
    const double p = std::norm(v(i));
    const double m = dims.m_of(i);
    const int k = dims.n_of(i);
    n += p * k;
    sz += p * m;
    sz2 += p * m * m;
    if (k == dims.fock_cutoff()) top += p;
  }
  n /= norm2;
  sz /= norm2;
  sz2 /= norm2;
  top /= norm2;
  return detail::from_moments(dims.n_atoms(), n, sz, sz2, s * (s + 1.0) - sz2, top);
}

/// |<target|psi>|^2 for normalized target; psi is normalized internally.
inline double fidelity(const StateVector& psi, const StateVector& target) {
  if (!(psi.dims() == target.dims())) throw InvalidArgument("fidelity: dimension mismatch");
  const double n2 = psi.amplitudes().squaredNorm() * target.amplitudes().squaredNorm();
  return std::clamp(std::norm(target.amplitudes().dot(psi.amplitudes())) / n2, 0.0, 1.0);
}

inline double fidelity(const DensityMatrix& rho, const StateVector& target) {
  if (!(rho.dims() == target.dims())) throw InvalidArgument("fidelity: dimension mismatch");
  const auto& t = target.amplitudes();
  return std::clamp(t.dot(rho.entries() * t).real() / t.squaredNorm(), 0.0, 1.0);
}

}  // namespace dicke
