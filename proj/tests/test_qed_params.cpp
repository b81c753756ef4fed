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

#include "dicke/qed_params.hpp"

namespace dicke {
namespace {

MicroParams rubidium_setup() {
  MicroParams m;
  m.g = 20e6;
  m.Omega_r = 500e3;
  m.Omega_s = 500e3;
  m.Delta_r = 3.5e9;
  m.Delta_s = -3.5e9;
  m.omega_1 = 2.0e6;
  m.omega_c = 0.0;
  m.omega_r = -1.0e6;
  m.omega_s = 1.0e6;
  m.N = 100;
  m.kappa = 50e3;
  return m;
}

TEST(EffectiveParams, DispersiveShiftPerAtom) {
  const EffectiveParams e = effective_params(rubidium_setup());
  const double expect = (4.0 / 3.0) * (20e6 * 20e6 / 3.5e9) / 50e3;
  EXPECT_NEAR(std::abs(e.U_per_atom()), expect, 1e-12 * expect);
  EXPECT_NEAR(std::abs(e.U_per_atom()), 3.05, 0.01);
  EXPECT_LT(e.U, 0.0);
  EXPECT_NEAR(std::abs(e.lambda_r_per_sqrt_atom()), std::sqrt(3.0) * 20e6 * 500e3 / (12.0 * 3.5e9 * 50e3), 1e-15);
  EXPECT_EQ(e.kappa_input, 50e3);
}

TEST(EffectiveParams, EqualDetuningsCancelU) {
  MicroParams m = rubidium_setup();
  m.Delta_s = m.Delta_r;
  EXPECT_EQ(effective_params(m).U, 0.0);
}

TEST(EffectiveParams, OppositeDetuningsMaximizeU) {
  const MicroParams base = rubidium_setup();
  const double opposite = std::abs(effective_params(base).U);
  for (double sr : {1.0, -1.0}) {
    for (double ss : {1.0, -1.0}) {
      MicroParams m = base;
      m.Delta_r = sr * 3.5e9;
      m.Delta_s = ss * 3.5e9;
      EXPECT_LE(std::abs(effective_params(m).U), opposite * (1.0 + 1e-15));
    }
  }
}

TEST(EffectiveParams, MatchedRatiosGiveEqualCouplings) {
  MicroParams m = rubidium_setup();
  m.Omega_s = -m.Omega_r;
  const EffectiveParams e = effective_params(m);
  EXPECT_DOUBLE_EQ(e.lambda_r, e.lambda_s);
  EXPECT_FALSE(e.warning.has_value());
}

TEST(EffectiveParams, CouplingMismatchWarns) {
  const EffectiveParams e = effective_params(rubidium_setup());
  ASSERT_TRUE(e.warning.has_value());
  EXPECT_NE(e.warning->find("lambda_r"), std::string::npos);
  EXPECT_EQ(e.model(4).lambda, e.lambda_r);
  EXPECT_EQ(e.model(4).kappa, 1.0);
}

TEST(EffectiveParams, InvariantUnderCommonRescaling) {
  const MicroParams m = rubidium_setup();
  MicroParams s = m;
  const double f = 7.25;
  for (double* x : {&s.g, &s.Omega_r, &s.Omega_s, &s.Delta_r, &s.Delta_s, &s.omega_c, &s.omega_r, &s.omega_s,
                    &s.omega_1, &s.kappa}) {
    *x *= f;
  }
  const EffectiveParams a = effective_params(m), b = effective_params(s);
  EXPECT_NEAR(a.omega0, b.omega0, 1e-12 * std::max(1.0, std::abs(a.omega0)));
  EXPECT_NEAR(a.omega, b.omega, 1e-12 * std::max(1.0, std::abs(a.omega)));
  EXPECT_NEAR(a.U, b.U, 1e-12 * std::abs(a.U));
  EXPECT_NEAR(a.lambda_r, b.lambda_r, 1e-12 * std::abs(a.lambda_r));
  EXPECT_NEAR(a.lambda_s, b.lambda_s, 1e-12 * std::abs(a.lambda_s));
}

TEST(EffectiveParams, PoleGuard) {
  MicroParams m = rubidium_setup();
  m.Delta_r = m.omega_1 + 10.0;
  EXPECT_THROW(effective_params(m), InvalidArgument);
  m = rubidium_setup();
  m.Delta_s = -m.omega_1;
  EXPECT_THROW(effective_params(m), InvalidArgument);
  m = rubidium_setup();
  m.kappa = 0.0;
  EXPECT_THROW(effective_params(m), InvalidArgument);
  m = rubidium_setup();
  MappingOptions opt;
  opt.pole_guard = 1e6;
  EXPECT_THROW(effective_params(m, opt), InvalidArgument);
}

TEST(SuggestOffsets, RoundTrip) {
  const MicroParams m = suggest_offsets(rubidium_setup(), 0.01, 0.01);
  const EffectiveParams e = effective_params(m);
  EXPECT_NEAR(e.omega, 0.01, 1e-10);
  EXPECT_NEAR(e.omega0, 0.01, 1e-10);
  const MicroParams base = rubidium_setup();
  EXPECT_EQ(m.g, base.g);
  EXPECT_EQ(m.Omega_r, base.Omega_r);
  EXPECT_EQ(m.Delta_s, base.Delta_s);
  EXPECT_EQ(m.omega_1, base.omega_1);
  EXPECT_NEAR(m.omega_r + m.omega_s, base.omega_r + base.omega_s, 1e-6);
}

TEST(SuggestOffsets, ZeroTargetsCancelLightShifts) {
  const EffectiveParams e = effective_params(suggest_offsets(rubidium_setup(), 0.0, 0.0));
  EXPECT_NEAR(e.omega, 0.0, 1e-10);
  EXPECT_NEAR(e.omega0, 0.0, 1e-10);
}

TEST(SuggestOffsets, IdentityWhenTargetsMet) {
  const MicroParams tuned = suggest_offsets(rubidium_setup(), 0.3, -0.2);
  const EffectiveParams e = effective_params(tuned);
  const MicroParams again = suggest_offsets(tuned, e.omega, e.omega0);
  EXPECT_NEAR(again.omega_c, tuned.omega_c, 1e-6);
  EXPECT_NEAR(again.omega_r, tuned.omega_r, 1e-6);
  EXPECT_NEAR(again.omega_s, tuned.omega_s, 1e-6);
  EXPECT_THROW(suggest_offsets(tuned, std::nan(""), 0.0), InvalidArgument);
}

TEST(ReadMicroParams, ParsesAndRejects) {
  const auto j = nlohmann::json::parse(R"({"N": 100, "kappa": 5e4, "g": 2e7, "Delta_r": 3.5e9})");
  const MicroParams m = read_micro_params(j);
  EXPECT_EQ(m.N, 100);
  EXPECT_EQ(m.kappa, 5e4);
  EXPECT_EQ(m.g, 2e7);
  EXPECT_EQ(m.Omega_r, 0.0);
  EXPECT_THROW(read_micro_params(nlohmann::json::parse(R"({"kappa": 1})")), InvalidArgument);
  EXPECT_THROW(read_micro_params(nlohmann::json::parse(R"({"N": 2})")), InvalidArgument);
  EXPECT_THROW(read_micro_params(nlohmann::json::parse(R"({"N": 2, "kappa": 1, "gg": 1})")), InvalidArgument);
  EXPECT_THROW(read_micro_params(nlohmann::json::parse(R"({"N": 2.5, "kappa": 1})")), InvalidArgument);
  EXPECT_THROW(read_micro_params(nlohmann::json::parse(R"({"N": 2, "kappa": "x"})")), InvalidArgument);
}

}  // namespace
}  // namespace dicke
