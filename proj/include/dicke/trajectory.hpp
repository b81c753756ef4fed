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

// trajectory.hpp: Monte-Carlo wave-function engine.
//
// Between jumps the unnormalized state obeys i d|psi>/dt = H_eff(t)|psi>,
// H_eff = H - i kappa a^dag a, integrated with Dormand-Prince 5(4) and its
// continuous extension. A jump sqrt(2 kappa) a fires when ||psi||^2 falls
// to a uniform random threshold; the crossing time is located by bisection
// on the dense output.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dicke/model.hpp"
#include "dicke/observables.hpp"
#include "dicke/random.hpp"

namespace dicke {

class TrajectoryError : public NumericalError {
 public:
  enum class Kind { norm_underflow, integrator_failure, cutoff_saturation };
  TrajectoryError(Kind kind, const std::string& what) : NumericalError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct TrajectoryOptions {
  double rtol{1e-8};
  double atol{1e-10};
  double sample_dt{0.1};
  double jump_time_tol{1e-6};
  /// Largest allowed normalized population in the top Fock level.
  double cutoff_tol{1e-6};
  bool keep_timeline{true};
  /// Store xi_D of the renormalized state right after each jump.
  bool record_post_jump_xi{false};
};

struct TimelineSample {
  double t{0};
  double sz{0};
  double xi_D{0};
  double photon_number{0};
  /// ||psi||^2 of the unnormalized state since the last jump.
  double norm2{1};
};

enum class Label { none, success, failure, error };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::none: return "none";
    case Label::success: return "success";
    case Label::failure: return "failure";
    case Label::error: return "error";
  }
  return "none";
}

struct TrajectoryRecord {
  std::uint64_t seed{0};
  double t_max{0};
  std::vector<double> jump_times;
  std::vector<double> post_jump_xi;
  std::optional<StateVector> final_state;
  std::vector<TimelineSample> timeline;
  Label label{Label::none};
  std::string error;

  std::size_t jumps_before(double t_cut) const {
    return static_cast<std::size_t>(std::lower_bound(jump_times.begin(), jump_times.end(), t_cut) -
                                    jump_times.begin());
  }
};

namespace detail {

/// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

}  // namespace detail

/// Called at every sample time with the unnormalized state since the last jump.
using StateObserver = std::function<void(double t, const Eigen::VectorXcd& psi)>;

class TrajectoryEngine {
 public:
  TrajectoryEngine(const ModelParams& p, OmegaProtocol protocol, TrajectoryOptions opt = {})
      : params_(p), protocol_(std::move(protocol)), opt_(opt), dims_(p.dims()) {
    p.validate();
    detail::require(opt_.sample_dt > 0.0, "TrajectoryOptions: sample_dt must be > 0");
    ModelParams p0 = p;
    p0.omega = 0.0;
    h0_ = build_effective_hamiltonian(p0).matrix();
    const FockOperators f = fock_operators(p.n_max);
    a_ = embed(dims_, identity, f.a).matrix();
    nvec_.resize(dims_.total_dim());
    for (int i = 0; i < dims_.total_dim(); ++i) nvec_(i) = dims_.n_of(i);
  }

  const SpaceDims& dims() const { return dims_; }
  const ModelParams& params() const { return params_; }
  const OmegaProtocol& protocol() const { return protocol_; }
  const TrajectoryOptions& options() const { return opt_; }

  TrajectoryRecord run(const StateVector& psi0, double t_max, std::uint64_t seed) const {
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.t_max = t_max;
    Philox4x32 rng(seed);
    std::vector<TimelineSample>* tl = opt_.keep_timeline ? &rec.timeline : nullptr;
    std::vector<double>* xi = opt_.record_post_jump_xi ? &rec.post_jump_xi : nullptr;
    Eigen::VectorXcd psi = integrate(psi0, t_max, &rng, rec.jump_times, xi, tl, {});
    rec.final_state.emplace(dims_, psi / psi.norm(), true);
    return rec;
  }

  /// Deterministic no-jump evolution; `observer` sees the unnormalized state.
  Eigen::VectorXcd evolve_no_jump(const StateVector& psi0, double t_max, const StateObserver& observer) const {
    std::vector<double> jumps;
    return integrate(psi0, t_max, nullptr, jumps, nullptr, nullptr, observer);
  }

 private:
  void derivative(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& out) const {
    const double w = protocol_.omega_at(t);
    const int* outer = h0_.outerIndexPtr();
    const int* inner = h0_.innerIndexPtr();
    const cplx* val = h0_.valuePtr();
    const Eigen::Index d = y.size();
    for (Eigen::Index i = 0; i < d; ++i) {
      cplx s = w * nvec_(i) * y(i);
      for (int k = outer[i]; k < outer[i + 1]; ++k) s += val[k] * y(inner[k]);
      out(i) = cplx(s.imag(), -s.real());  // -i s
    }
  }

  struct Workspace {
    explicit Workspace(Eigen::Index d)
        : k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), tmp(d), y1(d), r2(d), r3(d), r4(d), r5(d) {}
    Eigen::VectorXcd k1, k2, k3, k4, k5, k6, k7, tmp, y1, r2, r3, r4, r5;
  };

  void sample(double t, const Eigen::VectorXcd& y, std::vector<TimelineSample>* tl,
              const StateObserver& observer) const {
    if (observer) observer(t, y);
    if (!tl && opt_.cutoff_tol >= 1.0) return;
    const StateVector psi(dims_, y, false);
    const SteadyObservables o = observables(psi);
    if (o.top_fock_population > opt_.cutoff_tol) {
      throw TrajectoryError(TrajectoryError::Kind::cutoff_saturation,
                            "trajectory: population " + std::to_string(o.top_fock_population) +
                                " at n_max=" + std::to_string(dims_.fock_cutoff()) + " at t=" + std::to_string(t));
    }
    if (tl) tl->push_back({t, o.inversion, o.xi_D, o.photon_number, y.squaredNorm()});
  }

  Eigen::VectorXcd integrate(const StateVector& psi0, double t_max, Philox4x32* rng, std::vector<double>& jumps,
                             std::vector<double>* post_jump_xi, std::vector<TimelineSample>* tl,
                             const StateObserver& observer) const {
    using T = detail::Dopri5;
    detail::require(psi0.dims() == dims_, "trajectory: initial state has wrong dimensions");
    detail::require(t_max > 0.0, "trajectory: t_max must be > 0");
    detail::require(std::abs(psi0.amplitudes().squaredNorm() - 1.0) <= 1e-10, "trajectory: psi0 not normalized");

    const Eigen::Index d = dims_.total_dim();
    Workspace w(d);
    Eigen::VectorXcd y = psi0.amplitudes();
    double t = 0.0;
    double threshold = rng ? rng->uniform() : 0.0;

    std::vector<double> stops = protocol_.breakpoints(t_max);
    stops.push_back(t_max);
    std::size_t next_stop = 0;

    long sample_index = 0;
    bool samples_done = false;
    auto sample_time = [&](long k) { return std::min(static_cast<double>(k) * opt_.sample_dt, t_max); };
    sample(0.0, y, tl, observer);
    ++sample_index;

    // Initial step from a norm bound on H_eff.
    double hnorm = 0.0;
    for (int i = 0; i < h0_.outerSize(); ++i) {
      double row = 0.0;
      for (SparseMat::InnerIterator it(h0_, i); it; ++it) row += std::abs(it.value());
      hnorm = std::max(hnorm, row);
    }
    hnorm += std::abs(protocol_.omega_at(0.0)) * dims_.fock_cutoff();
    double h = std::min(0.1, 0.5 / std::max(hnorm, 1e-12));

    bool fresh = true;
    while (t < t_max) {
      const double t_seg = stops[next_stop];
      if (fresh) {
        derivative(t, y, w.k1);
        fresh = false;
      }
      h = std::min(h, t_seg - t);
      bool last_in_seg = false;
      if (t + h >= t_seg * (1.0 - 1e-15)) {
        h = t_seg - t;
        last_in_seg = true;
      }
      if (h <= 1e-14 * std::max(1.0, t)) {
        if (last_in_seg) {
          t = t_seg;
          ++next_stop;
          fresh = true;
          continue;
        }
        throw TrajectoryError(TrajectoryError::Kind::integrator_failure,
                              "trajectory: step size underflow at t=" + std::to_string(t));
      }

      // Dormand-Prince stages.
      w.tmp = y + h * (T::a21 * w.k1);
      derivative(t + T::c2 * h, w.tmp, w.k2);
      w.tmp = y + h * (T::a31 * w.k1 + T::a32 * w.k2);
      derivative(t + T::c3 * h, w.tmp, w.k3);
      w.tmp = y + h * (T::a41 * w.k1 + T::a42 * w.k2 + T::a43 * w.k3);
      derivative(t + T::c4 * h, w.tmp, w.k4);
      w.tmp = y + h * (T::a51 * w.k1 + T::a52 * w.k2 + T::a53 * w.k3 + T::a54 * w.k4);
      derivative(t + T::c5 * h, w.tmp, w.k5);
      w.tmp = y + h * (T::a61 * w.k1 + T::a62 * w.k2 + T::a63 * w.k3 + T::a64 * w.k4 + T::a65 * w.k5);
      const double t1 = last_in_seg ? t_seg : t + h;
      derivative(t1, w.tmp, w.k6);
      w.y1 = y + h * (T::b1 * w.k1 + T::b3 * w.k3 + T::b4 * w.k4 + T::b5 * w.k5 + T::b6 * w.k6);
      derivative(t1, w.y1, w.k7);
      w.tmp = h * (T::e1 * w.k1 + T::e3 * w.k3 + T::e4 * w.k4 + T::e5 * w.k5 + T::e6 * w.k6 + T::e7 * w.k7);

      double err = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y(i)), std::abs(w.y1(i)));
        const double e = std::abs(w.tmp(i)) / sc;
        err += e * e;
      }
      err = std::sqrt(err / static_cast<double>(d));
      if (!std::isfinite(err)) {
        throw TrajectoryError(TrajectoryError::Kind::integrator_failure,
                              "trajectory: non-finite error estimate at t=" + std::to_string(t));
      }
      if (err > 1.0) {
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        continue;
      }
      const double h_next = h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));

      // Continuous extension on [t, t1].
      w.r2 = w.y1 - y;
      w.r3 = h * w.k1 - w.r2;
      w.r4 = w.r2 - h * w.k7 - w.r3;
      w.r5 = h * (T::d1 * w.k1 + T::d3 * w.k3 + T::d4 * w.k4 + T::d5 * w.k5 + T::d6 * w.k6 + T::d7 * w.k7);
      auto dense = [&](double theta, Eigen::VectorXcd& out) {
        const double om = 1.0 - theta;
        out = y + theta * (w.r2 + om * (w.r3 + theta * (w.r4 + om * w.r5)));
      };

      const double n2_new = w.y1.squaredNorm();
      double t_event = t1;
      bool jumped = false;
      if (rng && n2_new <= threshold) {
        double lo = 0.0, hi = 1.0;
        while ((hi - lo) * h > opt_.jump_time_tol) {
          const double mid = 0.5 * (lo + hi);
          dense(mid, w.tmp);
          (w.tmp.squaredNorm() > threshold ? lo : hi) = mid;
        }
        t_event = t + hi * h;
        jumped = true;
      }

      // Samples strictly before a jump see the pre-jump state.
      while (!samples_done) {
        const double ts = sample_time(sample_index);
        if (jumped ? ts >= t_event : ts > t1) break;
        if (ts >= t1) {
          sample(ts, w.y1, tl, observer);
        } else {
          dense((ts - t) / h, w.tmp);
          sample(ts, w.tmp, tl, observer);
        }
        samples_done = ts >= t_max;
        ++sample_index;
      }

      if (jumped) {
        dense((t_event - t) / h, w.tmp);
        w.y1.noalias() = a_ * w.tmp;
        const double nrm = w.y1.norm();
        if (!(nrm > 1e-150)) {
          throw TrajectoryError(TrajectoryError::Kind::norm_underflow,
                                "trajectory: jump produced a null state at t=" + std::to_string(t_event));
        }
        y = w.y1 / nrm;
        if (!jumps.empty() && t_event <= jumps.back()) t_event = std::nextafter(jumps.back(), t_max);
        jumps.push_back(t_event);
        if (post_jump_xi) post_jump_xi->push_back(observables(StateVector(dims_, y, false)).xi_D);
        t = t_event;
        threshold = rng->uniform();
        fresh = true;
        h = std::max(h * 0.5, 1e-12);
        continue;
      }

      y.swap(w.y1);
      if (n2_new < 1e-250) {
        throw TrajectoryError(TrajectoryError::Kind::norm_underflow,
                              "trajectory: norm underflow at t=" + std::to_string(t1));
      }
      w.k1.swap(w.k7);
      t = t1;
      h = h_next;
      if (last_in_seg) {
        ++next_stop;
        fresh = true;
      }
    }
    return y;
  }

  ModelParams params_;
  OmegaProtocol protocol_;
  TrajectoryOptions opt_;
  SpaceDims dims_;
  SparseMat h0_;
  SparseMat a_;
  Eigen::VectorXd nvec_;
};

inline TrajectoryRecord run_trajectory(const ModelParams& p, const OmegaProtocol& protocol, const StateVector& psi0,
                                       double t_max, std::uint64_t seed, const TrajectoryOptions& opt = {}) {
  return TrajectoryEngine(p, protocol, opt).run(psi0, t_max, seed);
}

// --- post-selection ----------------------------------------------------------

inline Label postselect_single_jump(const TrajectoryRecord& r, double t_cut) {
  detail::require(t_cut <= r.t_max, "postselect_single_jump: t_cut must be <= t_max");
  return r.jumps_before(t_cut) == 1 ? Label::success : Label::failure;
}

inline Label postselect_step_count(const TrajectoryRecord& r, int expected_jumps) {
  detail::require(expected_jumps >= 1, "postselect_step_count: expected_jumps must be >= 1");
  return r.jump_times.size() == static_cast<std::size_t>(expected_jumps) ? Label::success : Label::failure;
}

inline Label classify_by_late_photon(const TrajectoryRecord& r, double window) {
  detail::require(window > 0.0 && window < r.t_max, "classify_by_late_photon: need 0 < window < t_max");
  if (r.jump_times.empty()) return Label::failure;
  return r.jump_times.back() > r.t_max - window ? Label::success : Label::failure;
}

inline Label postselect_min_jumps(const TrajectoryRecord& r, int k, double t_cut) {
  detail::require(k >= 1, "postselect_min_jumps: k must be >= 1");
  return r.jumps_before(t_cut) >= static_cast<std::size_t>(k) ? Label::success : Label::failure;
}

using PostSelector = std::function<Label(const TrajectoryRecord&)>;

// --- ensembles ---------------------------------------------------------------

struct EnsembleStats {
  std::size_t n_total{0};
  std::size_t n_success{0};
  std::size_t n_errored{0};
  double efficiency{0};
  double mean_fidelity{std::numeric_limits<double>::quiet_NaN()};
  double mean_xi_D{std::numeric_limits<double>::quiet_NaN()};
  double best_xi_D{std::numeric_limits<double>::quiet_NaN()};
  double frac_within_1pc{0};
  double frac_within_10pc{0};
  double ideal_xi_D{0};
};

struct EnsembleOptions {
  int jobs{1};
  /// Dicke state |N/2, target_m> used for fidelity and the ideal xi_D.
  double target_m{0.0};
  TrajectoryOptions trajectory{};
  std::function<void(std::size_t done, std::size_t total)> progress{};
};

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<TrajectoryRecord> records;
};

inline double final_xi(const TrajectoryRecord& r) {
  return r.final_state ? observables(*r.final_state).xi_D : std::numeric_limits<double>::quiet_NaN();
}

/// Statistics over successful trajectories; errored runs count in n_total.
inline EnsembleStats summarize(const std::vector<TrajectoryRecord>& records, const SpaceDims& dims, double target_m) {
  EnsembleStats s;
  s.n_total = records.size();
  const int N = dims.n_atoms();
  s.ideal_xi_D = 1.0 / (N + 2.0 - 4.0 * target_m * target_m / N);
  const StateVector target = product_state(dims, target_m, 0);
  double fid = 0, xi = 0, best = std::numeric_limits<double>::infinity();
  std::size_t w1 = 0, w10 = 0;
  for (const auto& r : records) {
    if (r.label == Label::error) ++s.n_errored;
    if (r.label != Label::success) continue;
    ++s.n_success;
    fid += fidelity(*r.final_state, target);
    const double x = final_xi(r);
    xi += x;
    best = std::min(best, x);
    const double rel = std::abs(x - s.ideal_xi_D) / s.ideal_xi_D;
    w1 += rel <= 0.01 ? 1 : 0;
    w10 += rel <= 0.10 ? 1 : 0;
  }
  s.efficiency = s.n_total ? static_cast<double>(s.n_success) / s.n_total : 0.0;
  if (s.n_success) {
    s.mean_fidelity = fid / s.n_success;
    s.mean_xi_D = xi / s.n_success;
    s.best_xi_D = best;
    s.frac_within_1pc = static_cast<double>(w1) / s.n_success;
    s.frac_within_10pc = static_cast<double>(w10) / s.n_success;
  }
  return s;
}

/// Runs n_traj trajectories with seeds trajectory_seed(master_seed, i) on a
/// pool of `jobs` workers; records come back in index order.
inline EnsembleResult run_ensemble(const ModelParams& p, const OmegaProtocol& protocol, const StateVector& psi0,
                                   double t_max, std::size_t n_traj, std::uint64_t master_seed,
                                   const PostSelector& postselector, const EnsembleOptions& opt = {}) {
  detail::require(n_traj >= 1, "run_ensemble: n_traj must be >= 1");
  const TrajectoryEngine engine(p, protocol, opt.trajectory);
  EnsembleResult out;
  out.records.resize(n_traj);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n_traj; i = next++) {
      const std::uint64_t seed = trajectory_seed(master_seed, i);
      TrajectoryRecord rec;
      try {
        rec = engine.run(psi0, t_max, seed);
        rec.label = postselector ? postselector(rec) : Label::none;
      } catch (const NumericalError& e) {
        rec = TrajectoryRecord{};
        rec.seed = seed;
        rec.t_max = t_max;
        rec.label = Label::error;
        rec.error = e.what();
      }
      out.records[i] = std::move(rec);
      const std::size_t k = ++done;
      if (opt.progress) opt.progress(k, n_traj);
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
  out.stats = summarize(out.records, p.dims(), opt.target_m);
  return out;
}

inline double binomial_sigma(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace dicke
