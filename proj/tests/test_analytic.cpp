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

#include <gtest/gtest.h>

#include <cmath>

#include "dicke/analytic.hpp"
#include "oracles.hpp"

namespace dicke {
namespace {

ModelParams dispersive(double U = 1000.0) {
  ModelParams p;
  p.N = 10;
  p.omega = 1.0;
  p.omega0 = 0.2;
  p.lambda = 0.1;
  p.U = U;
  return p;
}

TEST(DickeXi, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(dicke_xi(10, 0.0), 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(dicke_xi(100, 0.0), 1.0 / 102.0);
  for (int N : {1, 2, 7, 10, 50}) {
    EXPECT_NEAR(dicke_xi(N, 0.5 * N), 0.5, 1e-15);
    EXPECT_NEAR(dicke_xi(N, -0.5 * N), 0.5, 1e-15);
  }
  EXPECT_THROW(dicke_xi(10, 6.0), InvalidArgument);
}

TEST(DickeXi, MatchesPureStateObservables) {
  for (int N = 1; N <= 50; ++N) {
    const SpaceDims d(N, 1);
    for (int k = 0; k <= N; ++k) {
      const double m = -0.5 * N + k;
      EXPECT_NEAR(dicke_xi(N, m), observables(dicke_state(d, m)).xi_D, 1e-12) << N << " " << m;
    }
  }
}

TEST(TransitionTime, FormulaAndScaling) {
  const ModelParams p = dispersive();
  const double expect = p.U * p.U / (20.0 * p.lambda * p.lambda) * 16.0 / (30.0 - 20.0);
  EXPECT_NEAR(transition_time(10, -5.0, 1, p), expect, 1e-9 * expect);
  const ModelParams p2 = dispersive(2000.0);
  EXPECT_NEAR(transition_time(10, -3.0, 1, p2) / transition_time(10, -3.0, 1, p), 4.0, 1e-12);
  EXPECT_THROW(transition_time(10, -1.0, 1, p), InvalidArgument);
  EXPECT_THROW(transition_time(10, 1.0, -1, p), InvalidArgument);
  EXPECT_THROW(transition_time(10, 5.0, 1, p), InvalidArgument);
  EXPECT_NO_THROW(transition_time(10, 1.0, 1, p));
  double sum = 0.0;
  for (double m = -5.0; m <= -2.0; m += 1.0) sum += transition_time(10, m, 1, p);
  EXPECT_DOUBLE_EQ(total_transition_time(10, -5.0, p), sum);
}

TEST(TransitionTime, WithinFactorTwoOfThreeStateModel) {
  const ModelParams p = dispersive();
  for (double m = -5.0; m <= -2.0; m += 1.0) {
    const double formula = transition_time(10, m, 1, p);
    const double oracle = three_state_transfer_time(10, m, p);
    EXPECT_GT(oracle / formula, 0.5) << m;
    EXPECT_LT(oracle / formula, 2.0) << m;
  }
}

TEST(ThreeState, NoCouplingNoFlux) {
  ModelParams p = dispersive();
  p.lambda = 0.0;
  const ThreeStateSeries s = integrate_three_state(10, -2.0, p, 50.0, 100);
  for (double f : s.flux) EXPECT_EQ(f, 0.0);
  EXPECT_EQ(s.amplitudes.front().alpha, cplx(1.0));
}

TEST(ThreeState, ResonantStepIsIndependentOfU) {
  ModelParams p = dispersive(1000.0);
  p.lambda = 0.2;
  ModelParams q = p;
  q.U = 4000.0;
  const double t1 = three_state_transfer_time(10, -1.0, p);
  const double t2 = three_state_transfer_time(10, -1.0, q);
  EXPECT_NEAR(t1 / t2, 1.0, 0.01);
  // the dispersive step next to it does depend on U
  EXPECT_GT(three_state_transfer_time(10, -2.0, q) / three_state_transfer_time(10, -2.0, p), 10.0);
}

TEST(ThreeState, EmissionProbabilityApproachesOne) {
  ModelParams p = dispersive();
  p.lambda = 0.2;
  const double T = 400.0;
  const int n = 4000;
  const ThreeStateSeries s = integrate_three_state(10, -1.0, p, T, n);
  double emitted = 0.0;
  for (int k = 0; k < n; ++k) emitted += 0.5 * (T / n) * 2.0 * p.kappa * (s.flux[k] + s.flux[k + 1]);
  const auto& last = s.amplitudes.back();
  const double survival = std::norm(last.alpha) + std::norm(last.beta) + std::norm(last.gamma);
  EXPECT_GT(emitted, 0.99);
  EXPECT_NEAR(emitted, 1.0 - survival, 1e-4);
  for (const auto& a : s.amplitudes) {
    EXPECT_LE(std::norm(a.alpha) + std::norm(a.beta) + std::norm(a.gamma), 1.0 + 1e-12);
  }
}

TEST(SuccessProbability, BinomialWeights) {
  EXPECT_NEAR(success_probability_css(2), 0.5, 1e-15);
  EXPECT_NEAR(success_probability_css(10), 420.0 / 1024.0, 1e-14);
  EXPECT_NEAR(success_probability_css(100), 0.156, 5e-4);
  EXPECT_THROW(success_probability_css(9), InvalidArgument);
  EXPECT_THROW(success_probability_css(0), InvalidArgument);
  for (int N : {2, 4, 10, 20, 100, 1000}) {
    const Eigen::VectorXcd v = css_state(N, 1.0);
    const double direct = std::norm(v(N / 2 - 1)) + std::norm(v(N / 2 + 1));
    EXPECT_NEAR(success_probability_css(N), direct, 1e-12) << N;
  }
}

TEST(WStateError, FormulaValues) {
  EXPECT_NEAR(w_state_error(10, 0.2, 500.0), 6e-5, 1e-18);
  EXPECT_NEAR(w_state_error(20, 0.2, 1000.0), w_state_error(10, 0.2, 500.0), 1e-18);
  EXPECT_EQ(w_state_error(10, 0.0, 500.0), 0.0);
  EXPECT_THROW(w_state_error(10, 0.2, 0.0), InvalidArgument);
}

TEST(WStateError, WithinFactorThreeOfNoJumpEvolution) {
  for (double U : {250.0, 500.0, 1000.0}) {
    const double eps = w_state_error(10, 0.2, U);
    const double sim = oracle::w_state_infidelity(10, 0.2, U, 0.2);
    EXPECT_GT(sim / eps, 1.0 / 3.0) << U;
    EXPECT_LT(sim / eps, 3.0) << U;
  }
}

}  // namespace
}  // namespace dicke
