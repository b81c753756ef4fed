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
#include <sstream>

#include "dicke/steadystate.hpp"

namespace dicke {
namespace {

ModelParams fig1(double lambda, int n_max = 6) {
  ModelParams p;
  p.N = 10;
  p.omega = 1.0;
  p.omega0 = 0.2;
  p.lambda = lambda;
  p.U = 1000.0;
  p.n_max = n_max;
  return p;
}

// Null vector of the dense generator via SVD: independent of the sparse
// constrained solve.
Eigen::MatrixXcd dense_null_state(const Liouvillian& L) {
  const Eigen::MatrixXcd g(L.generator);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeFullV);
  const Eigen::VectorXcd v = svd.matrixV().col(g.cols() - 1);
  const int d = L.dims.total_dim();
  Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

TEST(SteadyState, TrappedCentralState) {
  const DensityMatrix rho = steady_state(fig1(0.1));
  rho.validate();
  const SteadyObservables o = observables(rho);
  EXPECT_LT(std::abs(o.inversion), 0.05);
  EXPECT_NEAR(o.xi_D, 1.0 / 12.0, 0.15 / 12.0);
  EXPECT_LT(o.top_fock_population, 1e-6);
}

TEST(SteadyState, ResidualBelowTolerance) {
  const ModelParams p = fig1(0.2, 4);
  const Liouvillian L = build_liouvillian(p);
  const DensityMatrix rho = steady_state(L);
  EXPECT_LT(L.apply(rho.entries()).norm(), 1e-9 * L.generator.norm());
  EXPECT_LT((rho.entries() - rho.entries().adjoint()).norm(), 1e-10);
  EXPECT_NEAR(rho.entries().trace().real(), 1.0, 1e-10);
}

TEST(SteadyState, UncoupledIsNonUnique) {
  ModelParams p = fig1(0.0, 3);
  EXPECT_THROW(steady_state(p), NonUniqueSteadyState);
}

TEST(SteadyState, MatchesDenseNullVector) {
  ModelParams p;
  p.N = 4;
  p.n_max = 4;
  p.omega = 1.0;
  p.omega0 = 0.2;
  p.lambda = 0.3;
  p.U = 0.0;
  const Liouvillian L = build_liouvillian(p);
  const Eigen::MatrixXcd oracle = dense_null_state(L);
  const DensityMatrix rho = steady_state(L);
  EXPECT_LT((rho.entries() - oracle).norm(), 1e-9);

  const ScanTable t = scan_U(p, {0.0}, {0.3});
  ASSERT_EQ(t.rows.size(), 1u);
  const SteadyObservables o = observables(DensityMatrix(L.dims, oracle));
  EXPECT_NEAR(t.rows[0].xi_D, o.xi_D, 1e-9);
  EXPECT_NEAR(t.rows[0].photon_number, o.photon_number, 1e-9);
  EXPECT_NEAR(t.rows[0].inversion, o.inversion, 1e-9);
}

TEST(Observables, PureDickeStates) {
  const SpaceDims d(10, 2);
  const SteadyObservables c = observables(DensityMatrix::pure(dicke_state(d, 0.0)));
  EXPECT_NEAR(c.xi_D, 1.0 / 12.0, 1e-14);
  EXPECT_EQ(c.depth_bound, 10);
  const SteadyObservables top = observables(DensityMatrix::pure(dicke_state(d, 5.0)));
  EXPECT_NEAR(top.xi_D, 0.5, 1e-14);
  EXPECT_EQ(top.depth_bound, 0);
  // pure-state overload agrees with the density-matrix path
  const StateVector css = with_vacuum(d, css_state(10, cplx(0.7, 0.2)));
  EXPECT_NEAR(observables(css).xi_D, observables(DensityMatrix::pure(css)).xi_D, 1e-12);
}

TEST(DepthBound, TableValuesAndMonotonicity) {
  EXPECT_EQ(depth_bound(0.0839), 10);
  EXPECT_EQ(depth_bound(0.0197), 49);
  EXPECT_EQ(depth_bound(0.5), 0);
  EXPECT_EQ(depth_bound(0.9), 0);
  EXPECT_THROW(depth_bound(0.0), InvalidArgument);
  EXPECT_THROW(depth_bound(-0.1), InvalidArgument);
  int prev = depth_bound(0.001);
  for (double xi = 0.001; xi < 1.0; xi *= 1.01) {
    const int k = depth_bound(xi);
    EXPECT_LE(k, prev);
    prev = k;
  }
}

TEST(Scan, LargeUTrends) {
  const ScanTable t = scan_U(fig1(0.2, 4), {100.0, 300.0, 1000.0}, {0.2});
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& r : t.rows) EXPECT_TRUE(r.ok());
  EXPECT_LT(std::abs(t.rows[2].inversion), std::abs(t.rows[0].inversion) + 1e-12);
  EXPECT_LT(std::abs(t.rows[2].inversion), 0.05);
  EXPECT_LT(t.rows[2].photon_number, t.rows[1].photon_number);
  EXPECT_LT(t.rows[1].photon_number, t.rows[0].photon_number);
}

TEST(Scan, FlagsFailedRowsAndContinues) {
  ScanOptions opt;
  opt.jobs = 2;
  const ScanTable t = scan_U(fig1(0.2, 3), {500.0, 1000.0}, {0.0, 0.2}, opt);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].flag, "nonunique");
  EXPECT_EQ(t.rows[1].flag, "nonunique");
  EXPECT_TRUE(t.rows[2].ok());
  EXPECT_TRUE(t.rows[3].ok());
  EXPECT_EQ(t.flagged(), 2u);

  ModelParams big = fig1(0.2, 6);
  big.N = 100;
  const ScanTable c = scan_U(big, {1000.0}, {0.2});
  EXPECT_EQ(c.rows[0].flag, "capacity");
}

TEST(Scan, EmptyGridIsRejected) {
  EXPECT_THROW(scan_U(fig1(0.1), {}, {0.1}), InvalidArgument);
  EXPECT_THROW(scan_U(fig1(0.1), {1.0}, {}), InvalidArgument);
}

TEST(ScanCsv, RoundTripsExactly) {
  ScanTable t;
  t.rows.push_back({1000.0, 0.1, 1.0 / 3.0, -2.0e-17, 0.083406711209876543, 10, "ok"});
  t.rows.push_back({std::nextafter(250.0, 300.0), 0.4, 0.1 + 0.2, 1e-300, 0.49999999999999994, 0, "ok"});
  t.rows.push_back({0.0, 0.0, std::nan(""), std::nan(""), std::nan(""), 0, "nonunique"});
  std::stringstream ss;
  write_csv(ss, t);
  EXPECT_EQ(ss.str().rfind("# units: kappa=1\n", 0), 0u);
  const ScanTable back = read_csv(ss);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.rows[i].U, t.rows[i].U);
    EXPECT_EQ(back.rows[i].lambda, t.rows[i].lambda);
    EXPECT_EQ(back.rows[i].photon_number, t.rows[i].photon_number);
    EXPECT_EQ(back.rows[i].inversion, t.rows[i].inversion);
    EXPECT_EQ(back.rows[i].xi_D, t.rows[i].xi_D);
    EXPECT_EQ(back.rows[i].depth_bound, t.rows[i].depth_bound);
  }
  EXPECT_TRUE(std::isnan(back.rows[2].xi_D));
  EXPECT_EQ(back.rows[2].flag, "nonunique");
}

TEST(Resonance, ParabolicInterpolation) {
  ScanTable t;
  for (int k = -5; k <= 5; ++k) {
    const double x = 10.0 + 0.1 * k;
    t.rows.push_back({100.0 * x, 0.2, 0.0, 0.0, 0.09 + 3.0 * (x - 10.03) * (x - 10.03), 0, "ok"});
  }
  const Resonance r = locate_resonance(t, 10, 100.0, -1.0, 1.0);
  ASSERT_TRUE(r.found);
  EXPECT_NEAR(r.found_U_over_omega, 10.03, 1e-9);
  EXPECT_NEAR(r.xi_min, 0.09, 1e-12);
  // a minimum on the window edge is not a resonance
  const Resonance edge = locate_resonance(t, 10, 100.0, -1.0 / 1.05, 0.3);
  EXPECT_FALSE(edge.found);
}

TEST(CutoffAdequacy, TrappedRegime) {
  ModelParams p = fig1(0.1, 4);
  p.N = 4;
  p.U = 400.0;
  const CutoffCheck c = cutoff_adequacy(p);
  EXPECT_TRUE(c.adequate()) << c.max_relative_change;
}

}  // namespace
}  // namespace dicke
