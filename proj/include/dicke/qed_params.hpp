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

// qed_params.hpp: microscopic Raman cavity-QED parameters -> effective model.
//
// Inputs are ordinary frequencies in Hz (angular frequency / 2 pi). Only
// ratios to kappa enter the outputs. Optical frequencies (omega_c, omega_r,
// omega_s) should be given relative to a common reference frequency:
// only their differences matter, and absolute optical values would cost
// about ten significant digits.

#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <json.hpp>

#include "dicke/model.hpp"

namespace dicke {

struct MicroParams {
  double g{0};
  double Omega_r{0};
  double Omega_s{0};
  double Delta_r{0};
  double Delta_s{0};
  double omega_c{0};
  double omega_r{0};
  double omega_s{0};
  double omega_1{0};
  int N{1};
  double kappa{1};
};

struct EffectiveParams {
  double omega0{0};
  double omega{0};
  double U{0};
  double lambda_r{0};
  double lambda_s{0};
  int N{1};
  /// kappa in the input units, the normalization applied to every field.
  double kappa_input{1};
  std::optional<std::string> warning;

  double U_per_atom() const { return U / N; }
  double lambda_r_per_sqrt_atom() const { return lambda_r / std::sqrt(static_cast<double>(N)); }
  double lambda_s_per_sqrt_atom() const { return lambda_s / std::sqrt(static_cast<double>(N)); }

  /// Simulation parameters with lambda = lambda_r.
  ModelParams model(int n_max) const {
    ModelParams p;
    p.N = N;
    p.omega = omega;
    p.omega0 = omega0;
    p.lambda = lambda_r;
    p.U = U;
    p.kappa = 1.0;
    p.n_max = n_max;
    return p;
  }
};

struct MappingOptions {
  /// Smallest allowed |detuning denominator|, in units of kappa.
  double pole_guard{1.0};
  /// Relative lambda_r / lambda_s mismatch above which a warning is attached.
  double lambda_mismatch_tol{0.01};
};

namespace detail {

inline void check_micro(const MicroParams& m, const MappingOptions& opt) {
  require(m.kappa > 0.0 && std::isfinite(m.kappa), "MicroParams: kappa must be > 0");
  require(m.N >= 1, "MicroParams: N must be >= 1");
  const double fields[] = {m.g, m.Omega_r, m.Omega_s, m.Delta_r, m.Delta_s, m.omega_c, m.omega_r, m.omega_s, m.omega_1};
  for (double f : fields) require(std::isfinite(f), "MicroParams: non-finite frequency");
  const double guard = opt.pole_guard * m.kappa;
  auto pole = [&](double den, const char* name) {
    if (!(std::abs(den) >= guard)) {
      throw InvalidArgument(std::string("effective_params: denominator ") + name + " = " + std::to_string(den) +
                            " is within the pole guard " + std::to_string(guard));
    }
  };
  pole(m.Delta_r, "Delta_r");
  pole(m.Delta_s, "Delta_s");
  pole(m.Delta_r - m.omega_1, "Delta_r - omega_1");
  pole(m.Delta_s + m.omega_1, "Delta_s + omega_1");
}

/// Light shift of omega0 (input units).
inline double spin_light_shift(const MicroParams& m) {
  const double r2 = m.Omega_r * m.Omega_r, s2 = m.Omega_s * m.Omega_s;
  return (r2 / m.Delta_r - r2 / (m.Delta_r - m.omega_1) - s2 / m.Delta_s + s2 / (m.Delta_s + m.omega_1)) / 6.0;
}

/// Dispersive shift of omega (input units).
inline double cavity_light_shift(const MicroParams& m) {
  return (m.N / 3.0) * (m.g * m.g / m.Delta_s + m.g * m.g / m.Delta_r);
}

}  // namespace detail

inline EffectiveParams effective_params(const MicroParams& m, const MappingOptions& opt = {}) {
  detail::check_micro(m, opt);
  EffectiveParams e;
  e.N = m.N;
  e.kappa_input = m.kappa;
  const double k = m.kappa;
  e.omega0 = (m.omega_1 - 0.5 * (m.omega_s - m.omega_r) + detail::spin_light_shift(m)) / k;
  e.omega = (m.omega_c - 0.5 * (m.omega_r + m.omega_s) + detail::cavity_light_shift(m)) / k;
  e.U = (2.0 * m.N / 3.0) * (m.g * m.g / m.Delta_s - m.g * m.g / m.Delta_r) / k;
  const double c = std::sqrt(3.0 * m.N) * m.g / 12.0;
  e.lambda_r = c * m.Omega_r / m.Delta_r / k;
  e.lambda_s = c * m.Omega_s / m.Delta_s / k;
  if (e.lambda_r != 0.0 && std::abs(e.lambda_r - e.lambda_s) / std::abs(e.lambda_r) > opt.lambda_mismatch_tol) {
    e.warning = "lambda_r and lambda_s differ by " +
                std::to_string(100.0 * std::abs(e.lambda_r - e.lambda_s) / std::abs(e.lambda_r)) +
                "%; simulating with lambda = lambda_r";
  }
  return e;
}

/// Returns m with omega_c and omega_s - omega_r chosen so that the mapped
/// omega and omega0 equal the targets (units of kappa). omega_r + omega_s,
/// omega_1 and all couplings are unchanged.
inline MicroParams suggest_offsets(const MicroParams& m, double target_omega, double target_omega0) {
  detail::require(std::isfinite(target_omega) && std::isfinite(target_omega0), "suggest_offsets: targets must be finite");
  MicroParams out = m;
  const double sum = m.omega_r + m.omega_s;
  out.omega_c = target_omega * m.kappa + 0.5 * sum - detail::cavity_light_shift(m);
  const double diff = 2.0 * (m.omega_1 + detail::spin_light_shift(m) - target_omega0 * m.kappa);
  out.omega_s = 0.5 * (sum + diff);
  out.omega_r = 0.5 * (sum - diff);
  return out;
}

/// Reads a flat JSON object with the MicroParams field names; N and kappa
/// are required, other fields default to zero.
inline MicroParams read_micro_params(const nlohmann::json& j) {
  detail::require(j.is_object(), "micro params: expected a JSON object");
  MicroParams m;
  m.kappa = 0.0;
  bool have_n = false, have_kappa = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "schema") continue;
    if (key == "N") {
      detail::require(value.is_number_integer(), "micro params: N must be an integer");
      m.N = value.get<int>();
      have_n = true;
      continue;
    }
    detail::require(value.is_number(), "micro params: " + key + " must be a number");
    const double v = value.get<double>();
    if (key == "g") m.g = v;
    else if (key == "Omega_r") m.Omega_r = v;
    else if (key == "Omega_s") m.Omega_s = v;
    else if (key == "Delta_r") m.Delta_r = v;
    else if (key == "Delta_s") m.Delta_s = v;
    else if (key == "omega_c") m.omega_c = v;
    else if (key == "omega_r") m.omega_r = v;
    else if (key == "omega_s") m.omega_s = v;
    else if (key == "omega_1") m.omega_1 = v;
    else if (key == "kappa") { m.kappa = v; have_kappa = true; }
    else throw InvalidArgument("micro params: unknown key '" + key + "'");
  }
  detail::require(have_n, "micro params: missing required key 'N'");
  detail::require(have_kappa, "micro params: missing required key 'kappa'");
  return m;
}

}  // namespace dicke
