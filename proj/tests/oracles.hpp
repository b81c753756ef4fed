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

// Brute-force reference computations shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <vector>

#include "dicke/analytic.hpp"
#include "dicke/steadystate.hpp"
#include "dicke/trajectory.hpp"

namespace dicke::oracle {

/// Fixed-step RK4 on vec(rho) with the module Liouvillian.
inline Eigen::MatrixXcd master_equation_rk4(const Liouvillian& L, const Eigen::MatrixXcd& rho0, double t, double dt) {
  const int d = L.dims.total_dim();
  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), static_cast<Eigen::Index>(d) * d);
  const long steps = std::lround(t / dt);
  const double h = t / steps;
  for (long s = 0; s < steps; ++s) {
    const Eigen::VectorXcd k1 = L.generator * v;
    const Eigen::VectorXcd k2 = L.generator * (v + 0.5 * h * k1);
    const Eigen::VectorXcd k3 = L.generator * (v + 0.5 * h * k2);
    const Eigen::VectorXcd k4 = L.generator * (v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return Eigen::Map<Eigen::MatrixXcd>(v.data(), d, d);
}

inline double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Eigen::MatrixXcd diff = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Jump-time-weighted infidelity of the first emission from |N/2,-N/2,0>
/// with omega resonant on m = -N/2 + 1, against the W state |N/2,-N/2+1,0>.
/// Trajectory-free: uses only the no-jump evolution and the weight
/// 2 kappa ||a psi(t)||^2.
inline double w_state_infidelity(int N, double lambda, double U, double omega0, double t_max = 200.0, int n_max = 2) {
  ModelParams p;
  p.N = N;
  p.n_max = n_max;
  p.lambda = lambda;
  p.U = U;
  p.omega0 = omega0;
  const double m_w = -0.5 * N + 1.0;
  p.omega = resonant_omega(U, N, m_w);
  TrajectoryOptions o;
  o.keep_timeline = false;
  o.cutoff_tol = 1.0;
  o.sample_dt = 0.01;
  const TrajectoryEngine eng(p, OmegaProtocol::constant(p.omega), o);
  const SpaceDims d = p.dims();
  const SparseMat a = embed(d, identity, fock_operators(n_max).a).matrix();
  const StateVector w = dicke_state(d, m_w);
  std::vector<double> weight, infid;
  eng.evolve_no_jump(dicke_state(d, -0.5 * N), t_max, [&](double, const Eigen::VectorXcd& y) {
    const Eigen::VectorXcd ay = a * y;
    const double n2 = ay.squaredNorm();
    weight.push_back(2.0 * p.kappa * n2);
    infid.push_back(n2 > 0.0 ? 1.0 - std::norm(w.amplitudes().dot(ay)) / n2 : 0.0);
  });
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < weight.size(); ++i) {
    num += 0.5 * (weight[i] * infid[i] + weight[i + 1] * infid[i + 1]);
    den += 0.5 * (weight[i] + weight[i + 1]);
  }
  return num / den;
}

/// Probability of exactly one jump in [0, T] computed without sampling:
/// integral over t1 of p(t1) * P(no jump in (t1, T] | jump at t1), with the
/// post-jump survival evaluated on a uniform grid of `grid` points.
inline double single_jump_probability(const ModelParams& p, const StateVector& psi0, double T, int grid = 27) {
  TrajectoryOptions o;
  o.keep_timeline = false;
  const TrajectoryEngine eng(p, OmegaProtocol::constant(p.omega), o);
  const SpaceDims d = p.dims();
  const SparseMat a = embed(d, identity, fock_operators(p.n_max).a).matrix();
  const double h = T / (grid - 1);
  std::vector<Eigen::VectorXcd> states;
  std::vector<double> times;
  const double dt = h / 8.0;
  o.sample_dt = dt;
  const TrajectoryEngine fine(p, OmegaProtocol::constant(p.omega), o);
  std::vector<double> rate;
  fine.evolve_no_jump(psi0, T, [&](double t, const Eigen::VectorXcd& y) {
    const Eigen::VectorXcd ay = a * y;
    rate.push_back(2.0 * p.kappa * ay.squaredNorm());
    times.push_back(t);
    states.push_back(ay);
  });
  std::vector<double> survival_coarse(grid);
  for (int g = 0; g < grid; ++g) {
    const std::size_t i = static_cast<std::size_t>(g) * 8;
    const double rest = T - times[i];
    if (rest <= 0.0 || states[i].norm() == 0.0) {
      survival_coarse[g] = 1.0;
      continue;
    }
    const StateVector post(d, states[i] / states[i].norm());
    survival_coarse[g] = eng.evolve_no_jump(post, rest, {}).squaredNorm();
  }
  double total = 0.0;
  // post-jump survival linearly interpolated between coarse grid points
  for (std::size_t i = 0; i + 1 < rate.size(); ++i) {
    auto surv = [&](std::size_t k) {
      const double x = static_cast<double>(k) / 8.0;
      const int g0 = std::min(grid - 2, static_cast<int>(x));
      const double f = x - g0;
      return (1.0 - f) * survival_coarse[g0] + f * survival_coarse[g0 + 1];
    };
    total += 0.5 * dt * (rate[i] * surv(i) + rate[i + 1] * surv(i + 1));
  }
  return total;
}

}  // namespace dicke::oracle
