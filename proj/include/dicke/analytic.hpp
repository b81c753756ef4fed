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

// analytic.hpp: closed-form estimates and the three-state model.

#pragma once

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "dicke/hilbert.hpp"
#include "dicke/model.hpp"
#include "dicke/observables.hpp"

namespace dicke {

/// xi_D of the Dicke state |N/2, m>: 1/(N + 2 - 4 m^2 / N).
inline double dicke_xi(int N, double m) {
  detail::require(N >= 1, "dicke_xi: N must be >= 1");
  detail::require(std::abs(m) <= 0.5 * N + 1e-12, "dicke_xi: |m| must be <= N/2");
  return 1.0 / (N + 2.0 - 4.0 * m * m / N);
}

/// Dispersive estimate of the time to leave |N/2,m,0> towards m + direction:
///   (U^2 / (2 N kappa lambda^2)) (m +- 1)^2 / [S(S+1) - m(m +- 1)].
inline double transition_time(int N, double m, int direction, const ModelParams& p) {
  detail::require(direction == 1 || direction == -1, "transition_time: direction must be +1 or -1");
  detail::require(N >= 1 && std::abs(m) <= 0.5 * N, "transition_time: |m| must be <= N/2");
  const double target = m + direction;
  detail::require(std::abs(target) > 1e-12, "transition_time: step onto m = 0 is resonant; estimate invalid");
  detail::require(std::abs(target) <= 0.5 * N, "transition_time: target level outside the spin multiplet");
  detail::require(p.lambda != 0.0, "transition_time: lambda must be nonzero");
  const double s = 0.5 * N;
  const double ladder = s * (s + 1.0) - m * target;
  return p.U * p.U / (2.0 * N * p.kappa * p.lambda * p.lambda) * target * target / ladder;
}

/// Sum of transition_time over the dispersive steps from m_start towards
/// m = 0, stopping before the final resonant step.
inline double total_transition_time(int N, double m_start, const ModelParams& p) {
  detail::require(std::abs(m_start) <= 0.5 * N, "total_transition_time: |m_start| must be <= N/2");
  const int dir = m_start < 0 ? 1 : -1;
  double total = 0.0;
  for (double m = m_start; std::abs(m + dir) > 0.5; m += dir) total += transition_time(N, m, dir, p);
  return total;
}

struct ThreeStateAmplitudes {
  cplx alpha{1.0};
  cplx beta{0.0};
  cplx gamma{0.0};
};

struct ThreeStateSeries {
  std::vector<double> t;
  std::vector<ThreeStateAmplitudes> amplitudes;
  /// |beta|^2 + |gamma|^2; the emission rate is 2 kappa times this.
  std::vector<double> flux;
};

/// H_eff restricted to {|m,0>, |m-1,1>, |m+1,1>}.
inline Eigen::Matrix3cd three_state_hamiltonian(int N, double m, const ModelParams& p) {
  detail::require(std::abs(m) <= 0.5 * N, "three_state: |m| must be <= N/2");
  const double s = 0.5 * N;
  const double g = p.lambda / std::sqrt(static_cast<double>(N));
  auto photon_level = [&](double mm) { return p.omega0 * mm + p.omega + (p.U / N) * mm - kI * p.kappa; };
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  h(0, 0) = p.omega0 * m;
  h(1, 1) = m - 1.0 >= -s ? photon_level(m - 1.0) : cplx(0.0);
  h(2, 2) = m + 1.0 <= s ? photon_level(m + 1.0) : cplx(0.0);
  const double down = m - 1.0 >= -s ? g * std::sqrt(s * (s + 1.0) - m * (m - 1.0)) : 0.0;
  const double up = m + 1.0 <= s ? g * std::sqrt(s * (s + 1.0) - m * (m + 1.0)) : 0.0;
  h(0, 1) = h(1, 0) = down;
  h(0, 2) = h(2, 0) = up;
  return h;
}

/// Propagates alpha = 1 on a uniform grid of `samples` + 1 points in [0, t_max].
inline ThreeStateSeries integrate_three_state(int N, double m, const ModelParams& p, double t_max,
                                              int samples = 1000) {
  detail::require(t_max > 0.0 && samples >= 1, "integrate_three_state: need t_max > 0 and samples >= 1");
  const Eigen::Matrix3cd h = three_state_hamiltonian(N, m, p);
  const double dt = t_max / samples;
  const Eigen::Matrix3cd step = (Eigen::Matrix3cd(-kI * dt * h)).exp();
  ThreeStateSeries out;
  Eigen::Vector3cd v(1.0, 0.0, 0.0);
  for (int k = 0; k <= samples; ++k) {
    out.t.push_back(k * dt);
    out.amplitudes.push_back({v(0), v(1), v(2)});
    out.flux.push_back(std::norm(v(1)) + std::norm(v(2)));
    v = step * v;
  }
  return out;
}

/// Time at which the no-jump probability ||psi||^2 of the three-state model
/// first reaches 1/e.
inline double three_state_transfer_time(int N, double m, const ModelParams& p) {
  const Eigen::Matrix3cd h = three_state_hamiltonian(N, m, p);
  auto norm2 = [&](double t) {
    const Eigen::Vector3cd v = (Eigen::Matrix3cd(-kI * t * h)).exp().col(0);
    return v.squaredNorm();
  };
  const double target = std::exp(-1.0);
  double lo = 0.0, hi = 1.0;
  while (norm2(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw NumericalError("three_state_transfer_time: no decay");
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (norm2(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// 2^-N [C(N, N/2+1) + C(N, N/2-1)]: weight of m = +-1 in the equatorial CSS.
inline double success_probability_css(int N) {
  detail::require(N >= 2, "success_probability_css: N must be >= 2");
  detail::require(N % 2 == 0, "success_probability_css: N must be even (no m = 0 Dicke state for odd N)");
  const double lc = log_binomial(N, N / 2 + 1) - N * std::log(2.0);
  return 2.0 * std::exp(lc);
}

/// Infidelity estimate 15 lambda^2 N^2 / (4 U^2) for W-state preparation.
inline double w_state_error(int N, double lambda, double U) {
  detail::require(U != 0.0, "w_state_error: U must be nonzero");
  return 15.0 * lambda * lambda * N * N / (4.0 * U * U);
}

}  // namespace dicke
