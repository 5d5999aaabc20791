// Copyright 2026 The fedprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: simulate | attack | report | sweep.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fedprint/commands.h"
#include "fedprint/errors.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

template <typename T>
std::optional<T> opt(const CLI::Option* o, const T& value) {
  return o->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Client fingerprinting attacks on shuffled federated updates"};
  app.require_subcommand(1);

  std::string config, trace, sidecar, out, method, selector, assignment, grid;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  auto* sim = app.add_subcommand("simulate", "Run federated training and write a trace");
  sim->add_option("--config", config, "Experiment config JSON")->required();
  sim->add_option("--out,--trace", trace, "Output trace path")->required();
  auto* sim_sidecar =
      sim->add_option("--sidecar", sidecar, "Truth sidecar path (default <trace>.truth.json)");
  auto* sim_seed = sim->add_option("--seed", seed, "Override the config seed");
  sim->add_option("--jobs", jobs, "Client threads per round")->check(CLI::PositiveNumber);

  auto* atk = app.add_subcommand("attack", "Cluster trace records by client");
  atk->add_option("--trace", trace, "Trace file")->required();
  atk->add_option("--out", out, "Output assignment path")->required();
  auto* atk_method = atk->add_option("--method", method, "greedy | kmeans | spectral");
  auto* atk_selector = atk->add_option("--selector", selector, "Layer selector, e.g. 1:both");
  auto* atk_seed = atk->add_option("--seed", seed, "Clustering seed");

  auto* rep = app.add_subcommand("report", "Score an assignment against the truth");
  rep->add_option("--trace", trace, "Trace file")->required();
  auto* rep_assignment =
      rep->add_option("--assignment", assignment, "Assignment file (default: attack now)");
  auto* rep_sidecar =
      rep->add_option("--sidecar", sidecar, "Truth sidecar (default <trace>.truth.json)");
  auto* rep_out = rep->add_option("--out", out, "Write the JSON report here");
  auto* rep_method = rep->add_option("--method", method, "Attack method without --assignment");
  auto* rep_selector = rep->add_option("--selector", selector, "Selector without --assignment");
  auto* rep_seed = rep->add_option("--seed", seed, "Clustering seed without --assignment");

  auto* swp = app.add_subcommand("sweep", "Run a grid of experiments");
  swp->add_option("--config", grid, "Sweep grid JSON")->required();
  swp->add_option("--out", out, "Output directory")->required();
  swp->add_option("--jobs", jobs, "Cells run in parallel")->check(CLI::PositiveNumber);
  auto* swp_seed = swp->add_option("--seed", seed, "Override every cell's seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      fedprint::SimulateArgs a;
      a.config = config;
      a.trace_out = trace;
      if (sim_sidecar->count() > 0) a.sidecar_out = sidecar;
      a.seed = opt(sim_seed, seed);
      a.threads = jobs;
      fedprint::cmd_simulate(a, std::cout);
    } else if (atk->parsed()) {
      fedprint::AttackArgs a;
      a.trace = trace;
      a.out = out;
      a.method = opt(atk_method, method);
      a.selector = opt(atk_selector, selector);
      a.seed = opt(atk_seed, seed);
      fedprint::cmd_attack(a, std::cout);
    } else if (rep->parsed()) {
      fedprint::ReportArgs a;
      a.trace = trace;
      if (rep_assignment->count() > 0) a.assignment = assignment;
      if (rep_sidecar->count() > 0) a.sidecar = sidecar;
      if (rep_out->count() > 0) a.out = out;
      a.method = opt(rep_method, method);
      a.selector = opt(rep_selector, selector);
      a.seed = opt(rep_seed, seed);
      fedprint::cmd_report(a, std::cout);
    } else if (swp->parsed()) {
      fedprint::SweepArgs a;
      a.grid = grid;
      a.out_dir = out;
      a.jobs = jobs;
      a.seed = opt(swp_seed, seed);
      fedprint::cmd_sweep(a, std::cout);
    }
  } catch (const fedprint::DivergedError& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const fedprint::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fedprint::ConfigError& e) {
    std::cerr << "error: bad config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fedprint::InputError& e) {
    std::cerr << "error: bad input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
