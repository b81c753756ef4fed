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

// cli.hpp: run configuration and scenario drivers behind the `dicke` tool.
//
// A run config is a flat JSON object:
//
//   {"schema": "dicke-run/1", "scenario": "herald", "N": 10, "U": 1000, ...}
//
// Every scenario has a fixed key set (see scenario_specs); unknown keys and
// missing required keys are usage errors. Resolved values (defaults filled,
// command-line overrides applied) are written to run-manifest.json.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dicke/analytic.hpp"
#include "dicke/qed_params.hpp"
#include "dicke/steadystate.hpp"
#include "dicke/trajectory.hpp"

namespace dicke::cli {

inline constexpr const char* kSchema = "dicke-run/1";
inline constexpr const char* kVersion = "dicke-squeeze 0.1.0";
inline constexpr const char* kUnitsLine = "# units: kappa=1";

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kNoSuccess = 3 };

class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class KeyType { integer, real, real_list, int_list, boolean };

struct KeySpec {
  std::string name;
  KeyType type;
  bool required{false};
  nlohmann::json default_value{};
};

struct ScenarioSpec {
  std::string name;
  std::vector<KeySpec> keys;
  /// Groups of keys of which exactly one must be present.
  std::vector<std::vector<std::string>> one_of;
};

namespace detail {

using nlohmann::json;
using K = KeyType;

inline std::vector<KeySpec> trajectory_keys() {
  return {{"n_traj", K::integer, true},       {"master_seed", K::integer, true}, {"sample_dt", K::real, false, 0.1},
          {"rtol", K::real, false, 1e-8},     {"atol", K::real, false, 1e-10},   {"timeline_count", K::integer, false, 0},
          {"cutoff_tol", K::real, false, 1e-6}};
}

inline std::vector<KeySpec> join(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

inline const std::vector<ScenarioSpec>& scenario_specs() {
  using K = KeyType;
  using detail::join;
  static const std::vector<ScenarioSpec> specs = {
      {"steady-scan",
       {{"N", K::integer}, {"N_values", K::int_list}, {"U_values", K::real_list, true},
        {"lambda_values", K::real_list, true}, {"omega", K::real, false, 1.0}, {"omega0", K::real, false, 0.2},
        {"kappa", K::real, false, 1.0}, {"n_max", K::integer, false, 6}, {"max_total_dim", K::integer, false, 512}},
       {{"N", "N_values"}}},
      {"resonance-scan",
       {{"N", K::integer, true}, {"omega", K::real, true}, {"omega0", K::real, false, 0.2},
        {"lambda", K::real, false, 0.2}, {"kappa", K::real, false, 1.0}, {"n_max", K::integer, false, 4},
        {"U_over_omega_min", K::real, true}, {"U_over_omega_max", K::real, true},
        {"U_over_omega_step", K::real, true}, {"m_values", K::real_list, false, nlohmann::json::array({-2, -1, 1, 2})},
        {"window", K::real, false, 1.0}, {"max_total_dim", K::integer, false, 512}},
       {}},
      {"herald",
       join({{"N", K::integer}, {"N_values", K::int_list}, {"U", K::real}, {"U_over_N", K::real},
             {"omega", K::real, false, 1.0}, {"omega0", K::real, false, 0.2}, {"lambda", K::real, false, 0.1},
             {"kappa", K::real, false, 1.0}, {"n_max", K::integer, false, 3}, {"t_max", K::real, true},
             {"t_cut", K::real}, {"css_eta_re", K::real, false, 1.0}, {"css_eta_im", K::real, false, 0.0},
             {"target_m", K::real, false, 0.0}},
            detail::trajectory_keys()),
       {{"N", "N_values"}, {"U", "U_over_N"}}},
      {"step-protocol",
       join({{"N", K::integer, true}, {"U", K::real, true}, {"omega0", K::real, false, 0.2},
             {"lambda", K::real, false, 0.2}, {"kappa", K::real, false, 1.0}, {"n_max", K::integer, false, 3},
             {"hold_time", K::real, true}, {"steps", K::integer, true}, {"initial_m", K::real},
             {"hist_bins", K::integer, false, 20}},
            detail::trajectory_keys()),
       {}},
      {"ramp-protocol",
       join({{"N", K::integer, true}, {"U", K::real, true}, {"omega0", K::real, false, 0.2},
             {"lambda", K::real, false, 0.2}, {"kappa", K::real, false, 1.0}, {"n_max", K::integer, false, 3},
             {"ramp_start", K::real, true}, {"ramp_end", K::real, true}, {"ramp_rate", K::real, true},
             {"hold_after", K::real, false, 0.0}, {"initial_m", K::real}, {"target_m", K::real, false, 0.0},
             {"expected_jumps", K::integer}, {"late_window", K::real}, {"hist_bins", K::integer, false, 20}},
            detail::trajectory_keys()),
       {}},
      {"tighten",
       join({{"N", K::integer, true}, {"U", K::real, true}, {"omega", K::real, true}, {"omega0", K::real, true},
             {"lambda", K::real, true}, {"kappa", K::real, false, 1.0}, {"n_max", K::integer, false, 3},
             {"t_max", K::real, true}, {"t_cut", K::real}, {"min_jumps", K::integer, true},
             {"css_eta_re", K::real, false, 1.0}, {"css_eta_im", K::real, false, 0.0}},
            detail::trajectory_keys()),
       {}},
      {"params-map",
       {{"N", K::integer, true}, {"kappa", K::real, true}, {"g", K::real, false, 0.0},
        {"Omega_r", K::real, false, 0.0}, {"Omega_s", K::real, false, 0.0}, {"Delta_r", K::real, true},
        {"Delta_s", K::real, true}, {"omega_c", K::real, false, 0.0}, {"omega_r", K::real, false, 0.0},
        {"omega_s", K::real, false, 0.0}, {"omega_1", K::real, false, 0.0}, {"target_omega", K::real},
        {"target_omega0", K::real}, {"pole_guard", K::real, false, 1.0}},
       {}},
      {"analytic",
       {{"N", K::integer, true}, {"omega", K::real, false, 1.0}, {"omega0", K::real, false, 0.2},
        {"lambda", K::real, false, 0.1}, {"U", K::real, true}, {"kappa", K::real, false, 1.0}},
       {}},
  };
  return specs;
}

inline const ScenarioSpec& scenario_spec(const std::string& name) {
  for (const auto& s : scenario_specs()) {
    if (s.name == name) return s;
  }
  throw UsageError("unknown scenario '" + name + "'");
}

/// Validated config with defaults filled in.
struct RunConfig {
  std::string scenario;
  nlohmann::json values;

  bool has(const std::string& k) const { return values.contains(k); }
  double real(const std::string& k) const { return values.at(k).get<double>(); }
  long long integer(const std::string& k) const { return values.at(k).get<long long>(); }
  std::vector<double> reals(const std::string& k) const { return values.at(k).get<std::vector<double>>(); }
  std::vector<int> ints(const std::string& k) const { return values.at(k).get<std::vector<int>>(); }
};

namespace detail {

inline void check_type(const std::string& key, const json& v, KeyType t) {
  auto fail = [&](const char* what) { throw UsageError("config key '" + key + "' must be " + what); };
  switch (t) {
    case KeyType::integer:
      if (!v.is_number_integer()) fail("an integer");
      break;
    case KeyType::real:
      if (!v.is_number()) fail("a number");
      break;
    case KeyType::boolean:
      if (!v.is_boolean()) fail("a boolean");
      break;
    case KeyType::real_list:
    case KeyType::int_list:
      if (!v.is_array()) fail("a list");
      for (const auto& e : v) {
        if (t == KeyType::int_list ? !e.is_number_integer() : !e.is_number()) {
          fail(t == KeyType::int_list ? "a list of integers" : "a list of numbers");
        }
      }
      break;
  }
}

}  // namespace detail

/// Validates `j` against its scenario. `expected` (if non-empty) must match
/// the config's scenario.
inline RunConfig parse_config(const nlohmann::json& j, const std::string& expected = "") {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  if (!j.contains("schema")) throw UsageError("config: missing required key 'schema'");
  if (!j.at("schema").is_string() || j.at("schema").get<std::string>() != kSchema) {
    throw UsageError(std::string("config: schema must be \"") + kSchema + "\"");
  }
  if (!j.contains("scenario")) throw UsageError("config: missing required key 'scenario'");
  if (!j.at("scenario").is_string()) throw UsageError("config key 'scenario' must be a string");
  RunConfig cfg;
  cfg.scenario = j.at("scenario").get<std::string>();
  if (!expected.empty() && expected != cfg.scenario) {
    throw UsageError("config scenario '" + cfg.scenario + "' does not match command '" + expected + "'");
  }
  const ScenarioSpec& spec = scenario_spec(cfg.scenario);
  cfg.values = nlohmann::json::object();
  for (const auto& [key, value] : j.items()) {
    if (key == "schema" || key == "scenario") continue;
    auto it = std::find_if(spec.keys.begin(), spec.keys.end(), [&](const KeySpec& k) { return k.name == key; });
    if (it == spec.keys.end()) throw UsageError("config: unknown key '" + key + "' for scenario " + cfg.scenario);
    detail::check_type(key, value, it->type);
    cfg.values[key] = value;
  }
  for (const auto& k : spec.keys) {
    if (cfg.values.contains(k.name)) continue;
    if (k.required) throw UsageError("config: missing required key '" + k.name + "'");
    if (!k.default_value.is_null()) cfg.values[k.name] = k.default_value;
  }
  for (const auto& group : spec.one_of) {
    int n = 0;
    std::string names;
    for (const auto& g : group) {
      n += cfg.values.contains(g) ? 1 : 0;
      names += (names.empty() ? "'" : " or '") + g + "'";
    }
    if (n == 0) throw UsageError("config: missing required key " + names);
    if (n > 1) throw UsageError("config: keys " + names + " are mutually exclusive");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path, const std::string& expected = "") {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config: " + path + ": " + e.what());
  }
  return parse_config(j, expected);
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<long long> n_traj;
  int jobs{0};
  bool quiet{false};
  std::string out{"out"};
};

inline int default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- output helpers ------------------------------------------------------------

inline std::string format_real(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

/// CSV with a units comment line; every number written at 17 significant digits.
inline void write_numeric_csv(const std::filesystem::path& path, const std::string& header,
                              const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << kUnitsLine << '\n' << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_real(row[i]);
    out << '\n';
  }
}

struct NumericCsv {
  std::string header;
  std::vector<std::vector<double>> rows;
};

inline NumericCsv read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  NumericCsv t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      t.header = line;
      continue;
    }
    std::vector<double> row;
    for (const auto& f : dicke::detail::split_csv(line)) row.push_back(dicke::detail::parse_double(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline constexpr const char* kSummaryHeader = "N,efficiency,fidelity,mean_xi_D,depth_bound,within_1pc,within_10pc";

inline std::vector<double> summary_row(int N, const EnsembleStats& s) {
  const double depth = std::isfinite(s.mean_xi_D) ? depth_bound(s.mean_xi_D) : std::nan("");
  return {static_cast<double>(N), s.efficiency, s.mean_fidelity, s.mean_xi_D, depth, s.frac_within_1pc,
          s.frac_within_10pc};
}

inline nlohmann::json record_json(const TrajectoryRecord& r, const StateVector& target) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["jump_times"] = r.jump_times;
  j["label"] = to_string(r.label);
  if (r.final_state) {
    j["final_xi_D"] = final_xi(r);
    j["final_fidelity"] = fidelity(*r.final_state, target);
  } else {
    j["final_xi_D"] = nullptr;
    j["final_fidelity"] = nullptr;
  }
  if (!r.post_jump_xi.empty()) j["post_jump_xi_D"] = r.post_jump_xi;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline void write_records(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records,
                          const StateVector& target) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << record_json(r, target).dump() << '\n';
}

/// Histogram of final xi_D over successful trajectories, bins spanning the observed range.
inline void write_histogram(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records,
                            int bins) {
  std::vector<double> xs;
  for (const auto& r : records) {
    if (r.label == Label::success) xs.push_back(final_xi(r));
  }
  std::vector<std::vector<double>> rows;
  if (!xs.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi <= lo) hi = lo + 1e-12;
    const double w = (hi - lo) / bins;
    std::vector<double> count(bins, 0.0);
    for (double x : xs) count[std::min(bins - 1, static_cast<int>((x - lo) / w))] += 1.0;
    for (int b = 0; b < bins; ++b) rows.push_back({lo + b * w, lo + (b + 1) * w, count[b]});
  }
  write_numeric_csv(path, "xi_D_low,xi_D_high,count", rows);
}

struct Context {
  RunConfig cfg;
  Overrides ov;
  std::ostream* out{&std::cout};
  std::ostream* err{&std::cerr};
  std::vector<std::string> artifacts;
  int exit_code{kOk};

  std::filesystem::path file(const std::string& name) {
    artifacts.push_back(name);
    return std::filesystem::path(ov.out) / name;
  }
  void log(const std::string& msg) const {
    if (!ov.quiet) *err << msg << '\n';
  }
  int jobs() const { return ov.jobs > 0 ? ov.jobs : default_jobs(); }
};

namespace detail {

inline ModelParams model_from(const RunConfig& c, int N) {
  ModelParams p;
  p.N = N;
  auto set = [&](const char* k, double& dst) {
    if (c.has(k)) dst = c.real(k);
  };
  set("omega", p.omega);
  set("omega0", p.omega0);
  set("lambda", p.lambda);
  set("kappa", p.kappa);
  if (c.has("U")) p.U = c.real("U");
  if (c.has("U_over_N")) p.U = c.real("U_over_N") * N;
  if (c.has("n_max")) p.n_max = static_cast<int>(c.integer("n_max"));
  p.validate();
  return p;
}

inline std::vector<int> atom_counts(const RunConfig& c) {
  std::vector<int> ns = c.has("N_values") ? c.ints("N_values") : std::vector<int>{static_cast<int>(c.integer("N"))};
  if (ns.empty()) throw UsageError("config: N_values is empty");
  for (int n : ns) {
    if (n < 1) throw UsageError("config: N must be >= 1");
  }
  return ns;
}

inline void require_usage(bool cond, const std::string& msg) {
  if (!cond) throw UsageError(msg);
}

/// Applies --seed / --n-traj and validates ensemble keys.
inline void resolve_ensemble(Context& ctx) {
  auto& v = ctx.cfg.values;
  if (ctx.ov.seed) v["master_seed"] = *ctx.ov.seed;
  if (ctx.ov.n_traj) v["n_traj"] = *ctx.ov.n_traj;
  require_usage(v.at("n_traj").get<long long>() >= 1, "n_traj must be >= 1");
  require_usage(v.at("master_seed").get<long long>() >= 0 || v.at("master_seed").is_number_unsigned(),
                "master_seed must be non-negative");
}

inline TrajectoryOptions trajectory_options(const RunConfig& c) {
  TrajectoryOptions o;
  o.sample_dt = c.real("sample_dt");
  o.rtol = c.real("rtol");
  o.atol = c.real("atol");
  o.cutoff_tol = c.real("cutoff_tol");
  o.keep_timeline = false;
  return o;
}

inline std::function<void(std::size_t, std::size_t)> progress(const Context& ctx, const std::string& tag) {
  if (ctx.ov.quiet) return {};
  std::ostream* err = ctx.err;
  return [err, tag](std::size_t done, std::size_t total) {
    const std::size_t step = std::max<std::size_t>(1, total / 20);
    if (done % step == 0 || done == total) *err << tag << ": " << done << "/" << total << '\n';
  };
}

struct EnsembleRun {
  EnsembleResult result;
  StateVector target;
};

/// Runs the configured ensemble, writes records / timelines, and sets the
/// zero-success exit code.
inline EnsembleRun run_and_write(Context& ctx, const ModelParams& p, const OmegaProtocol& protocol,
                                 const StateVector& psi0, double t_max, double target_m, const PostSelector& sel,
                                 const std::string& tag, TrajectoryOptions topt) {
  const RunConfig& c = ctx.cfg;
  EnsembleOptions eo;
  eo.jobs = ctx.jobs();
  eo.target_m = target_m;
  eo.trajectory = topt;
  eo.progress = progress(ctx, tag);
  const auto n = static_cast<std::size_t>(c.integer("n_traj"));
  const auto seed = c.values.at("master_seed").get<std::uint64_t>();
  EnsembleRun run{run_ensemble(p, protocol, psi0, t_max, n, seed, sel, eo), product_state(p.dims(), target_m, 0)};
  write_records(ctx.file("records_" + tag + ".jsonl"), run.result.records, run.target);

  const auto n_tl = static_cast<std::size_t>(std::max<long long>(0, c.integer("timeline_count")));
  if (n_tl > 0) {
    topt.keep_timeline = true;
    const TrajectoryEngine engine(p, protocol, topt);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < std::min(n_tl, n); ++i) {
      if (run.result.records[i].label == Label::error) continue;
      const TrajectoryRecord r = engine.run(psi0, t_max, trajectory_seed(seed, i));
      for (const auto& s : r.timeline) {
        rows.push_back({static_cast<double>(i), s.t, s.sz, s.xi_D, s.photon_number, s.norm2});
      }
    }
    write_numeric_csv(ctx.file("timelines_" + tag + ".csv"), "trajectory,t,sz,xi_D,photon_number,norm2", rows);
  }
  if (run.result.stats.n_success == 0) ctx.exit_code = std::max<int>(ctx.exit_code, kNoSuccess);
  return run;
}

inline StateVector css_input(const RunConfig& c, const SpaceDims& dims) {
  return with_vacuum(dims, css_state(dims.n_atoms(), cplx(c.real("css_eta_re"), c.real("css_eta_im"))));
}

}  // namespace detail

// --- scenarios -----------------------------------------------------------------

inline void cmd_steady_scan(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto U = c.reals("U_values");
  const auto lambdas = c.reals("lambda_values");
  detail::require_usage(!U.empty(), "steady-scan: empty U grid");
  detail::require_usage(!lambdas.empty(), "steady-scan: empty lambda grid");
  ScanOptions so;
  so.jobs = ctx.jobs();
  so.liouvillian.max_total_dim = static_cast<int>(c.integer("max_total_dim"));
  std::size_t total = 0, flagged = 0;
  *ctx.out << "N,lambda_over_kappa,U_over_kappa,xi_D,ideal_xi_D,ratio_to_ideal,inversion,photon_number,flag\n";
  for (int N : detail::atom_counts(c)) {
    const ModelParams base = detail::model_from(c, N);
    ctx.log("steady-scan: N=" + std::to_string(N) + ", " + std::to_string(U.size() * lambdas.size()) + " solves");
    const ScanTable t = scan_U(base, U, lambdas, so);
    {
      std::ofstream f(ctx.file("scan_N" + std::to_string(N) + ".csv"));
      write_csv(f, t);
    }
    total += t.rows.size();
    flagged += t.flagged();
    const double ideal = dicke_xi(N, 0.0);
    for (double lam : lambdas) {
      const ScanRow* last = nullptr;
      for (const auto& r : t.rows) {
        if (r.lambda == lam && (!last || r.U >= last->U) && r.flag == "ok") last = &r;
      }
      if (!last) continue;
      *ctx.out << N << ',' << format_real(lam) << ',' << format_real(last->U) << ',' << format_real(last->xi_D)
               << ',' << format_real(ideal) << ',' << format_real(last->xi_D / ideal) << ','
               << format_real(last->inversion) << ',' << format_real(last->photon_number) << ',' << last->flag
               << '\n';
    }
  }
  if (flagged * 10 > total) ctx.exit_code = std::max<int>(ctx.exit_code, kNumerical);
}

inline void cmd_resonance_scan(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int N = static_cast<int>(c.integer("N"));
  const ModelParams base = detail::model_from(c, N);
  const double lo = c.real("U_over_omega_min"), hi = c.real("U_over_omega_max"), step = c.real("U_over_omega_step");
  detail::require_usage(step > 0.0 && hi > lo, "resonance-scan: need U_over_omega_max > U_over_omega_min and step > 0");
  std::vector<double> U;
  for (long k = 0; lo + k * step <= hi + 1e-9 * step; ++k) U.push_back((lo + k * step) * base.omega);
  detail::require_usage(!U.empty(), "resonance-scan: empty U grid");
  ScanOptions so;
  so.jobs = ctx.jobs();
  so.liouvillian.max_total_dim = static_cast<int>(c.integer("max_total_dim"));
  ctx.log("resonance-scan: " + std::to_string(U.size()) + " solves");
  const ScanTable t = resonance_scan(base, U, so);
  {
    std::ofstream f(ctx.file("resonance_scan.csv"));
    write_csv(f, t);
  }
  std::vector<std::vector<double>> rows;
  *ctx.out << "m,predicted_U_over_omega,found_U_over_omega,xi_D_min,dicke_xi,found\n";
  for (double m : c.reals("m_values")) {
    const Resonance r = locate_resonance(t, N, base.omega, m, c.real("window"));
    const double ideal = dicke_xi(N, m);
    rows.push_back({m, r.predicted_U_over_omega, r.found_U_over_omega, r.xi_min, ideal, r.found ? 1.0 : 0.0});
    *ctx.out << format_real(m) << ',' << format_real(r.predicted_U_over_omega) << ','
             << format_real(r.found_U_over_omega) << ',' << format_real(r.xi_min) << ',' << format_real(ideal) << ','
             << (r.found ? 1 : 0) << '\n';
  }
  write_numeric_csv(ctx.file("resonances.csv"), "m,predicted_U_over_omega,found_U_over_omega,xi_D_min,dicke_xi,found",
                    rows);
  if (t.flagged() * 10 > t.rows.size()) ctx.exit_code = std::max<int>(ctx.exit_code, kNumerical);
}

inline void cmd_herald(Context& ctx) {
  detail::resolve_ensemble(ctx);
  const RunConfig& c = ctx.cfg;
  const double t_max = c.real("t_max");
  const double t_cut = c.has("t_cut") ? c.real("t_cut") : t_max;
  detail::require_usage(t_max > 0.0 && t_cut > 0.0 && t_cut <= t_max, "herald: need 0 < t_cut <= t_max");
  std::vector<std::vector<double>> rows;
  *ctx.out << kSummaryHeader << '\n';
  for (int N : detail::atom_counts(c)) {
    const ModelParams p = detail::model_from(c, N);
    const StateVector psi0 = detail::css_input(c, p.dims());
    const PostSelector sel = [t_cut](const TrajectoryRecord& r) { return postselect_single_jump(r, t_cut); };
    const auto run = detail::run_and_write(ctx, p, OmegaProtocol::constant(p.omega), psi0, t_max,
                                           c.real("target_m"), sel, "N" + std::to_string(N),
                                           detail::trajectory_options(c));
    rows.push_back(summary_row(N, run.result.stats));
    for (std::size_t i = 0; i < rows.back().size(); ++i) *ctx.out << (i ? "," : "") << format_real(rows.back()[i]);
    *ctx.out << '\n';
  }
  write_numeric_csv(ctx.file("summary.csv"), kSummaryHeader, rows);
}

namespace detail {

inline void report_protocol(Context& ctx, int N, const EnsembleRun& run, std::optional<double> late_agreement) {
  const EnsembleStats& s = run.result.stats;
  write_numeric_csv(ctx.file("summary.csv"), kSummaryHeader, {summary_row(N, s)});
  const int bins = static_cast<int>(ctx.cfg.integer("hist_bins"));
  require_usage(bins >= 1, "hist_bins must be >= 1");
  write_histogram(ctx.file("histogram.csv"), run.result.records, bins);
  const std::string header = "N,n_total,n_success,n_errored,success_rate,mean_fidelity,mean_xi_D,best_xi_D,"
                             "late_photon_agreement";
  const std::vector<double> row = {static_cast<double>(N), static_cast<double>(s.n_total),
                                   static_cast<double>(s.n_success), static_cast<double>(s.n_errored),
                                   s.efficiency, s.mean_fidelity, s.mean_xi_D, s.best_xi_D,
                                   late_agreement.value_or(std::nan(""))};
  write_numeric_csv(ctx.file("ensemble_stats.csv"), header, {row});
  *ctx.out << header << '\n';
  for (std::size_t i = 0; i < row.size(); ++i) *ctx.out << (i ? "," : "") << format_real(row[i]);
  *ctx.out << '\n';
}

}  // namespace detail

inline void cmd_step_protocol(Context& ctx) {
  detail::resolve_ensemble(ctx);
  const RunConfig& c = ctx.cfg;
  const int N = static_cast<int>(c.integer("N"));
  const ModelParams p = detail::model_from(c, N);
  const auto steps = c.integer("steps");
  detail::require_usage(steps >= 1, "step-protocol: steps must be >= 1");
  detail::require_usage(steps <= N, "step-protocol: steps must be <= N");
  const double m0 = c.has("initial_m") ? c.real("initial_m") : -0.5 * N;
  detail::require_usage(m0 == -0.5 * N, "step-protocol: the stepped schedule starts from m = -N/2");
  const double hold = c.real("hold_time");
  detail::require_usage(hold > 0.0, "step-protocol: hold_time must be > 0");
  const OmegaProtocol protocol = OmegaProtocol::discrete_step(hold, static_cast<int>(steps), p.U, N);
  const double t_max = protocol.schedule_end();
  const int expected = static_cast<int>(steps);
  const PostSelector sel = [expected](const TrajectoryRecord& r) { return postselect_step_count(r, expected); };
  const auto run = detail::run_and_write(ctx, p, protocol, product_state(p.dims(), m0, 0), t_max, m0 + expected, sel,
                                         "step", detail::trajectory_options(c));
  detail::report_protocol(ctx, N, run, std::nullopt);
}

inline void cmd_ramp_protocol(Context& ctx) {
  detail::resolve_ensemble(ctx);
  const RunConfig& c = ctx.cfg;
  const int N = static_cast<int>(c.integer("N"));
  ModelParams p = detail::model_from(c, N);
  const double m0 = c.has("initial_m") ? c.real("initial_m") : -0.5 * N;
  const double target = c.real("target_m");
  detail::require_usage(std::abs(m0) <= 0.5 * N && std::abs(target) <= 0.5 * N, "ramp-protocol: |m| must be <= N/2");
  const int expected = c.has("expected_jumps") ? static_cast<int>(c.integer("expected_jumps"))
                                               : static_cast<int>(std::lround(std::abs(target - m0)));
  detail::require_usage(expected >= 1, "ramp-protocol: expected_jumps must be >= 1");
  const OmegaProtocol protocol =
      OmegaProtocol::linear_ramp_to(c.real("ramp_start"), c.real("ramp_end"), c.real("ramp_rate"));
  p.omega = protocol.omega_at(0.0);
  const double hold = c.real("hold_after");
  detail::require_usage(hold >= 0.0, "ramp-protocol: hold_after must be >= 0");
  const double t_max = protocol.schedule_end() + hold;
  // default: the hold plus the ramp time across half a resonance spacing
  const double window = c.has("late_window") ? c.real("late_window")
                                             : std::min(hold + 0.5 * std::abs(p.U / N / c.real("ramp_rate")), 0.5 * t_max);
  detail::require_usage(window > 0.0 && window < t_max, "ramp-protocol: need 0 < late_window < t_max");
  const PostSelector sel = [expected](const TrajectoryRecord& r) { return postselect_step_count(r, expected); };
  const auto run = detail::run_and_write(ctx, p, protocol, product_state(p.dims(), m0, 0), t_max, target, sel,
                                         "ramp", detail::trajectory_options(c));
  std::size_t agree = 0, valid = 0;
  for (const auto& r : run.result.records) {
    if (r.label == Label::error) continue;
    ++valid;
    agree += classify_by_late_photon(r, window) == r.label ? 1 : 0;
  }
  detail::report_protocol(ctx, N, run, valid ? std::optional<double>(static_cast<double>(agree) / valid)
                                             : std::nullopt);
}

inline void cmd_tighten(Context& ctx) {
  detail::resolve_ensemble(ctx);
  const RunConfig& c = ctx.cfg;
  const int N = static_cast<int>(c.integer("N"));
  const ModelParams p = detail::model_from(c, N);
  const double t_max = c.real("t_max");
  const double t_cut = c.has("t_cut") ? c.real("t_cut") : t_max;
  detail::require_usage(t_max > 0.0 && t_cut > 0.0 && t_cut <= t_max, "tighten: need 0 < t_cut <= t_max");
  const auto k = c.integer("min_jumps");
  detail::require_usage(k >= 1, "tighten: min_jumps must be >= 1");
  TrajectoryOptions topt = detail::trajectory_options(c);
  topt.record_post_jump_xi = true;
  const PostSelector sel = [k, t_cut](const TrajectoryRecord& r) {
    return postselect_min_jumps(r, static_cast<int>(k), t_cut);
  };
  const auto run = detail::run_and_write(ctx, p, OmegaProtocol::constant(p.omega), detail::css_input(c, p.dims()),
                                         t_max, 0.0, sel, "tighten", topt);
  const EnsembleStats& s = run.result.stats;
  double best_sum = 0.0;
  for (const auto& r : run.result.records) {
    if (r.label != Label::success) continue;
    best_sum += *std::min_element(r.post_jump_xi.begin(), r.post_jump_xi.end());
  }
  const std::string header = "N,min_jumps,n_total,n_success,n_errored,fraction,mean_best_post_jump_xi_D";
  const std::vector<double> row = {static_cast<double>(N), static_cast<double>(k), static_cast<double>(s.n_total),
                                   static_cast<double>(s.n_success), static_cast<double>(s.n_errored), s.efficiency,
                                   s.n_success ? best_sum / s.n_success : std::nan("")};
  write_numeric_csv(ctx.file("summary.csv"), header, {row});
  *ctx.out << header << '\n';
  for (std::size_t i = 0; i < row.size(); ++i) *ctx.out << (i ? "," : "") << format_real(row[i]);
  *ctx.out << '\n';
}

inline void cmd_params_map(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  nlohmann::json micro = nlohmann::json::object();
  for (const char* k : {"g", "Omega_r", "Omega_s", "Delta_r", "Delta_s", "omega_c", "omega_r", "omega_s", "omega_1",
                        "N", "kappa"}) {
    micro[k] = c.values.at(k);
  }
  MicroParams m = read_micro_params(micro);
  detail::require_usage(c.has("target_omega") == c.has("target_omega0"),
                        "params-map: give both target_omega and target_omega0 or neither");
  if (c.has("target_omega")) m = suggest_offsets(m, c.real("target_omega"), c.real("target_omega0"));
  MappingOptions mo;
  mo.pole_guard = c.real("pole_guard");
  const EffectiveParams e = effective_params(m, mo);
  if (e.warning) ctx.log("params-map: warning: " + *e.warning);
  const std::vector<std::pair<std::string, double>> table = {
      {"omega0", e.omega0},
      {"omega", e.omega},
      {"U", e.U},
      {"lambda_r", e.lambda_r},
      {"lambda_s", e.lambda_s},
      {"U_over_N", e.U_per_atom()},
      {"lambda_r_over_sqrtN", e.lambda_r_per_sqrt_atom()},
      {"lambda_s_over_sqrtN", e.lambda_s_per_sqrt_atom()},
      {"omega_c_input", m.omega_c},
      {"omega_r_input", m.omega_r},
      {"omega_s_input", m.omega_s},
  };
  {
    std::ofstream out(ctx.file("effective_params.csv"));
    out << kUnitsLine << " (\"_input\" rows in input units)\nquantity,value\n";
    for (const auto& [k, v] : table) out << k << ',' << format_real(v) << '\n';
  }
  std::ostringstream human;
  human << "effective parameters (units of kappa)\n";
  for (const auto& [k, v] : table) human << "  " << std::left << std::setw(22) << k << std::setprecision(6) << v << '\n';
  {
    std::ofstream out(ctx.file("effective_params.txt"));
    out << human.str();
  }
  ctx.log(human.str());
  *ctx.out << "quantity,value\n";
  for (const auto& [k, v] : table) *ctx.out << k << ',' << format_real(v) << '\n';
}

inline void cmd_analytic(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int N = static_cast<int>(c.integer("N"));
  const ModelParams p = detail::model_from(c, N);
  std::vector<std::vector<double>> xi_rows, t_rows;
  for (int k = 0; k <= N; ++k) {
    const double m = -0.5 * N + k;
    const double xi = dicke_xi(N, m);
    xi_rows.push_back({m, xi, static_cast<double>(depth_bound(xi))});
    for (int dir : {-1, 1}) {
      const double target = m + dir;
      if (std::abs(target) > 0.5 * N || std::abs(target) < 1e-12 || p.lambda == 0.0) continue;
      t_rows.push_back({m, static_cast<double>(dir), transition_time(N, m, dir, p)});
    }
  }
  write_numeric_csv(ctx.file("dicke_xi.csv"), "m,xi_D,depth_bound", xi_rows);
  write_numeric_csv(ctx.file("transition_times.csv"), "m,direction,T", t_rows);
  std::vector<std::pair<std::string, double>> scalars = {{"w_state_error", w_state_error(N, p.lambda, p.U)}};
  if (N % 2 == 0) {
    scalars.push_back({"success_probability_css", success_probability_css(N)});
    scalars.push_back({"total_transition_time_from_south_pole", total_transition_time(N, -0.5 * N, p)});
  }
  std::ofstream out(ctx.file("analytic.csv"));
  out << kUnitsLine << "\nquantity,value\n";
  *ctx.out << "quantity,value\n";
  for (const auto& [k, v] : scalars) {
    out << k << ',' << format_real(v) << '\n';
    *ctx.out << k << ',' << format_real(v) << '\n';
  }
}

inline void write_manifest(Context& ctx) {
  nlohmann::json j;
  j["schema"] = kSchema;
  j["artifact_version"] = kVersion;
  j["scenario"] = ctx.cfg.scenario;
  j["resolved_config"] = ctx.cfg.values;
  j["resolved_config"]["schema"] = kSchema;
  j["resolved_config"]["scenario"] = ctx.cfg.scenario;
  j["units"] = "kappa=1";
  j["artifacts"] = ctx.artifacts;
  j["exit_code"] = ctx.exit_code;
  std::ofstream out(std::filesystem::path(ctx.ov.out) / "run-manifest.json");
  out << j.dump(2) << '\n';
}

/// Executes a validated config; returns the process exit code. Library
/// errors propagate to the caller.
inline int run(const RunConfig& cfg, const Overrides& ov, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  Context ctx{cfg, ov, &out, &err, {}, kOk};
  std::filesystem::create_directories(ov.out);
  const std::string& s = cfg.scenario;
  if (s == "steady-scan") cmd_steady_scan(ctx);
  else if (s == "resonance-scan") cmd_resonance_scan(ctx);
  else if (s == "herald") cmd_herald(ctx);
  else if (s == "step-protocol") cmd_step_protocol(ctx);
  else if (s == "ramp-protocol") cmd_ramp_protocol(ctx);
  else if (s == "tighten") cmd_tighten(ctx);
  else if (s == "params-map") cmd_params_map(ctx);
  else if (s == "analytic") cmd_analytic(ctx);
  else throw UsageError("unknown scenario '" + s + "'");
  write_manifest(ctx);
  return ctx.exit_code;
}

/// run() with errors mapped to exit codes and reported on `err`.
inline int run_guarded(const RunConfig& cfg, const Overrides& ov, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  try {
    return run(cfg, ov, out, err);
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace dicke::cli
