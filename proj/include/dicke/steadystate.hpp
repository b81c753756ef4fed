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

#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/SparseLU>

#include "dicke/model.hpp"
#include "dicke/observables.hpp"

namespace dicke {

/// L has more than one independent stationary state.
class NonUniqueSteadyState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct SteadyStateOptions {
  int refinement_steps{3};
  double residual_tol{1e-9};   // relative to ||L||_F
  double eig_error_floor{-1e-8};
};

/// Solves L[rho] = 0, Tr rho = 1 by replacing the rho_00 equation with the
/// trace constraint and factorizing with sparse LU.
inline DensityMatrix steady_state(const Liouvillian& L, const SteadyStateOptions& opt = {}) {
  const int d = L.dims.total_dim();
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  const Eigen::Index replaced = 0;

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(L.generator.nonZeros() + d);
  for (Eigen::Index c = 0; c < L.generator.outerSize(); ++c) {
    for (SparseMatCol::InnerIterator it(L.generator, c); it; ++it) {
      if (it.row() != replaced) trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int k = 0; k < d; ++k) trip.emplace_back(replaced, static_cast<Eigen::Index>(k) * d + k, 1.0);
  SparseMatCol A(dd, dd);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::SparseLU<SparseMatCol, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    throw NonUniqueSteadyState("steady_state: constrained generator is singular (" + lu.lastErrorMessage() +
                               "); the stationary state is not unique");
  }
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(dd);
  b(replaced) = 1.0;
  Eigen::VectorXcd x = lu.solve(b);
  for (int it = 0; it < opt.refinement_steps && x.allFinite(); ++it) {
    const Eigen::VectorXcd r = b - A * x;
    if (r.norm() < 1e-15) break;
    x += lu.solve(r);
  }
  // Any physical rho has ||rho||_F <= 1; a singular constrained system
  // shows up as a huge or non-finite solution.
  if (!x.allFinite() || x.norm() > 1.0 + 1e-6) {
    throw NonUniqueSteadyState("steady_state: ill-posed constrained system (||x|| = " +
                               std::to_string(x.norm()) + "); the stationary state is not unique");
  }

  Eigen::MatrixXcd rho = Eigen::Map<Eigen::MatrixXcd>(x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  Eigen::VectorXd evals = es.eigenvalues();
  if (evals.minCoeff() < opt.eig_error_floor) {
    throw NumericalError("steady_state: eigenvalue " + std::to_string(evals.minCoeff()) + " below floor");
  }
  if (evals.minCoeff() < 0.0) {
    evals = evals.cwiseMax(0.0);
    rho = es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
  }

  const double resid = L.apply(rho).norm();
  if (resid > opt.residual_tol * L.generator.norm()) {
    throw NumericalError("steady_state: residual " + std::to_string(resid) + " above tolerance");
  }
  return DensityMatrix(L.dims, std::move(rho));
}

inline DensityMatrix steady_state(const ModelParams& p, const LiouvillianOptions& lopt = {},
                                  const SteadyStateOptions& opt = {}) {
  return steady_state(build_liouvillian(p, lopt), opt);
}

// --- scans -------------------------------------------------------------------

struct ScanRow {
  double U{0};
  double lambda{0};
  double photon_number{std::numeric_limits<double>::quiet_NaN()};
  double inversion{std::numeric_limits<double>::quiet_NaN()};
  double xi_D{std::numeric_limits<double>::quiet_NaN()};
  int depth_bound{0};
  std::string flag{"ok"};

  bool ok() const { return flag == "ok"; }
};

struct ScanTable {
  std::vector<ScanRow> rows;

  std::size_t flagged() const {
    std::size_t k = 0;
    for (const auto& r : rows) k += r.ok() ? 0 : 1;
    return k;
  }
};

inline constexpr const char* kScanHeader =
    "U_over_kappa,lambda_over_kappa,photon_number,inversion,xi_D,depth_bound,flag";

inline void write_csv(std::ostream& os, const ScanTable& t) {
  os << "# units: kappa=1\n" << kScanHeader << '\n';
  os << std::setprecision(17);
  for (const auto& r : t.rows) {
    os << r.U << ',' << r.lambda << ',' << r.photon_number << ',' << r.inversion << ',' << r.xi_D << ','
       << r.depth_bound << ',' << r.flag << '\n';
  }
}

namespace detail {

inline double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw InvalidArgument("bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline ScanTable read_csv(std::istream& is) {
  ScanTable t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kScanHeader) throw InvalidArgument("scan CSV: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const auto c = detail::split_csv(line);
    if (c.size() != 7) throw InvalidArgument("scan CSV: expected 7 columns in '" + line + "'");
    ScanRow r;
    r.U = detail::parse_double(c[0]);
    r.lambda = detail::parse_double(c[1]);
    r.photon_number = detail::parse_double(c[2]);
    r.inversion = detail::parse_double(c[3]);
    r.xi_D = detail::parse_double(c[4]);
    r.depth_bound = std::stoi(c[5]);
    r.flag = c[6];
    t.rows.push_back(std::move(r));
  }
  return t;
}

struct ScanOptions {
  int jobs{1};
  LiouvillianOptions liouvillian{};
  SteadyStateOptions solver{};
};

inline ScanRow solve_row(ModelParams p, double U, double lambda, const ScanOptions& opt) {
  p.U = U;
  p.lambda = lambda;
  ScanRow row;
  row.U = U;
  row.lambda = lambda;
  try {
    const DensityMatrix rho = steady_state(build_liouvillian(p, opt.liouvillian), opt.solver);
    const SteadyObservables o = observables(rho);
    row.photon_number = o.photon_number;
    row.inversion = o.inversion;
    row.xi_D = o.xi_D;
    row.depth_bound = o.depth_bound;
  } catch (const NonUniqueSteadyState&) {
    row.flag = "nonunique";
  } catch (const CapacityError&) {
    row.flag = "capacity";
  } catch (const NumericalError&) {
    row.flag = "numerical";
  }
  return row;
}

/// Rows are (U, lambda) pairs in lambda-major order. Failed rows are kept
/// with a flag; the scan continues.
inline ScanTable scan_U(const ModelParams& base, const std::vector<double>& U_values,
                        const std::vector<double>& lambda_values, const ScanOptions& opt = {}) {
  detail::require(!U_values.empty(), "scan_U: empty U grid");
  detail::require(!lambda_values.empty(), "scan_U: empty lambda grid");
  base.validate();
  ScanTable t;
  t.rows.resize(U_values.size() * lambda_values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < t.rows.size(); i = next++) {
      const double lam = lambda_values[i / U_values.size()];
      const double U = U_values[i % U_values.size()];
      t.rows[i] = solve_row(base, U, lam, opt);
    }
  };
  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return t;
}

/// Fixed-lambda scan over U for omega >> kappa.
inline ScanTable resonance_scan(const ModelParams& base, const std::vector<double>& U_values,
                                const ScanOptions& opt = {}) {
  detail::require(base.omega > base.kappa, "resonance_scan: requires omega >> kappa");
  return scan_U(base, U_values, {base.lambda}, opt);
}

struct Resonance {
  double m{0};
  double predicted_U_over_omega{0};
  double found_U_over_omega{std::numeric_limits<double>::quiet_NaN()};
  double xi_min{std::numeric_limits<double>::quiet_NaN()};
  bool found{false};
};

/// Locates the local minimum of xi_D nearest U/omega = -N/m by discrete
/// argmin over `window` (in U/omega units) followed by a parabola through
/// the minimum and its two neighbours. Rows must be sorted by U.
inline Resonance locate_resonance(const ScanTable& t, int N, double omega, double m, double window) {
  Resonance r;
  r.m = m;
  r.predicted_U_over_omega = -static_cast<double>(N) / m;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    if (!row.ok()) continue;
    if (std::abs(row.U / omega - r.predicted_U_over_omega) > window) continue;
    if (!best || row.xi_D < t.rows[*best].xi_D) best = i;
  }
  if (!best || *best == 0 || *best + 1 >= t.rows.size()) return r;
  const auto& lo = t.rows[*best - 1];
  const auto& mid = t.rows[*best];
  const auto& hi = t.rows[*best + 1];
  if (!lo.ok() || !hi.ok() || lo.xi_D < mid.xi_D || hi.xi_D < mid.xi_D) return r;
  const double x0 = lo.U / omega, x1 = mid.U / omega, x2 = hi.U / omega;
  const double y0 = lo.xi_D, y1 = mid.xi_D, y2 = hi.xi_D;
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  const double c = y1 - a * x1 * x1 - b * x1;
  if (a > 0.0) {
    r.found_U_over_omega = std::clamp(-b / (2.0 * a), x0, x2);
    r.xi_min = std::min(y1, c - b * b / (4.0 * a));
  } else {
    r.found_U_over_omega = x1;
    r.xi_min = y1;
  }
  r.found = true;
  return r;
}

/// Fractional change of each steady-state observable when n_max grows by `extra`.
struct CutoffCheck {
  SteadyObservables base;
  SteadyObservables extended;
  double max_relative_change{0};
  bool adequate(double tol = 1e-3) const { return max_relative_change < tol; }
};

inline CutoffCheck cutoff_adequacy(const ModelParams& p, int extra = 2, const LiouvillianOptions& lopt = {}) {
  ModelParams q = p;
  q.n_max += extra;
  CutoffCheck c;
  c.base = observables(steady_state(p, lopt));
  c.extended = observables(steady_state(q, lopt));
  auto rel = [](double a, double b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); };
  c.max_relative_change = std::max({rel(c.base.xi_D, c.extended.xi_D, 1e-12),
                                    rel(c.base.sz_variance, c.extended.sz_variance, 1e-12),
                                    rel(c.base.transverse, c.extended.transverse, 1e-12),
                                    // absolute floors for quantities that vanish in the trapped regime
                                    rel(c.base.photon_number, c.extended.photon_number, 1e-3),
                                    rel(c.base.inversion, c.extended.inversion, 1e-2)});
  return c;
}

}  // namespace dicke
