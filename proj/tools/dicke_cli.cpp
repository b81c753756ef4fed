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

#include <CLI11.hpp>

#include "dicke/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = dicke::cli;
  CLI::App app{"Open generalized Dicke model simulator"};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  cli::Overrides ov;
  std::uint64_t seed = 0;
  long long n_traj = 0;

  std::vector<std::string> names = {"run"};
  for (const auto& s : cli::scenario_specs()) names.push_back(s.name);
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name, name == "run" ? "run the scenario named in the config" : "run " + name);
    sub->add_option("--config", config_path, "run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ov.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override master_seed");
    sub->add_option("--jobs", ov.jobs, "worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);
    sub->add_option("--n-traj", n_traj, "override n_traj");
    sub->add_flag("--quiet", ov.quiet, "suppress progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--n-traj")) ov.n_traj = n_traj;
  const std::string expected = sub->get_name() == "run" ? "" : sub->get_name();
  cli::RunConfig cfg;
  try {
    cfg = cli::load_config(config_path, expected);
  } catch (const dicke::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  }
  return cli::run_guarded(cfg, ov);
}
