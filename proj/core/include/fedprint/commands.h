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

#ifndef FEDPRINT_COMMANDS_H_
#define FEDPRINT_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fedprint/experiment.h"
#include "json.hpp"

namespace fedprint {

// Entry points behind the command-line subcommands. Each one reads and writes
// files only; printing goes to `log`.

std::filesystem::path default_sidecar_path(const std::filesystem::path& trace);

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path trace_out;
  std::optional<std::filesystem::path> sidecar_out;  // default: <trace>.truth.json
  std::optional<std::uint64_t> seed;                 // overrides config.seed
  std::size_t threads = 1;
};

SimulationResult cmd_simulate(const SimulateArgs& args, std::ostream& log);

struct AttackArgs {
  std::filesystem::path trace;
  std::filesystem::path out;
  // Unset values fall back to the config echoed in the trace header, then to
  // greedy on "1:both".
  std::optional<std::string> method;
  std::optional<std::string> selector;
  std::optional<std::uint64_t> seed;  // default: the trace seed
};

// Reads the trace file and nothing else.
AssignmentFile cmd_attack(const AttackArgs& args, std::ostream& log);

struct ReportArgs {
  std::filesystem::path trace;
  std::optional<std::filesystem::path> assignment;  // unset: attack in-process
  std::optional<std::filesystem::path> sidecar;
  std::optional<std::filesystem::path> out;  // JSON report
  std::optional<std::string> method;
  std::optional<std::string> selector;
  std::optional<std::uint64_t> seed;
};

// Prints the text table to `log`.
Report cmd_report(const ReportArgs& args, std::ostream& log);

// Grid file: {"base": <experiment config>, "axes": {name: [values...]},
// "keep_traces": bool}. Axis names: server_lr, rounds, clients, clip, sigma,
// method, selector. Axes are taken in alphabetical order.
struct SweepCell {
  std::size_t index = 0;
  std::vector<std::pair<std::string, nlohmann::json>> axis_values;
  nlohmann::json config;  // base with this cell's axis values applied
};

struct SweepGrid {
  nlohmann::json base;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
  bool keep_traces = false;
};

SweepGrid parse_sweep_grid(const nlohmann::json& j);
// Cross product in row-major order over `axes` (last axis varies fastest).
std::vector<SweepCell> expand_grid(const SweepGrid& grid);

struct SweepRow {
  std::size_t cell = 0;
  std::string status;  // ok | config_error | diverged | error
  std::string error;
  std::optional<Report> report;
};

struct SweepArgs {
  std::filesystem::path grid;
  std::filesystem::path out_dir;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
};

// Failed cells are recorded in summary.csv and do not stop the others.
std::vector<SweepRow> cmd_sweep(const SweepArgs& args, std::ostream& log);

}  // namespace fedprint

#endif  // FEDPRINT_COMMANDS_H_
