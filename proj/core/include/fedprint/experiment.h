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

#ifndef FEDPRINT_EXPERIMENT_H_
#define FEDPRINT_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedprint/attack.h"
#include "fedprint/corpus.h"
#include "fedprint/dp.h"
#include "fedprint/fedsim.h"
#include "fedprint/langmodel.h"
#include "fedprint/metrics.h"
#include "fedprint/trace_io.h"
#include "json.hpp"

namespace fedprint {

struct DataConfig {
  // Exactly one source is set.
  std::optional<SyntheticSpec> synthetic;
  std::vector<std::filesystem::path> files;
  TextLoadOptions text;
};

struct AttackConfig {
  AttackMethod method = AttackMethod::kGreedy;
  LayerSelector selector = LayerSelector::parse("1:both");
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  FedConfig fed;
  ModelConfig model;
  DataConfig data;
  std::optional<DpConfig> dp;
  AttackConfig attack;
  LayerSelector trace_layers = LayerSelector::parse("all:both");

  // Cross-field checks: K vs data source, selectors vs n_blocks.
  void validate() const;
};

// Strict parser: unknown keys and wrong types raise ConfigError naming the
// offending field, e.g. "fed.server_lr".
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

Corpus build_corpus(const ExperimentConfig& config);

SimulationResult simulate_experiment(const ExperimentConfig& config,
                                     std::size_t threads = 1);

struct Report {
  nlohmann::json config;  // echo of the run configuration, may be null
  std::string method;
  std::string selector;
  std::size_t clients = 0;
  std::size_t rounds = 0;
  std::string scope = "full trace: all K*T records";
  MetricScores scores;
  std::string baseline_procedure = "uniform random label per record";
  std::size_t baseline_trials = 1000;
  MetricScores baseline;
  Vector loss_curve;
  std::optional<DpSummary> dp;
  double wall_clock_seconds = 0.0;
};

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);
// Aligned text table of the report.
std::string render_report_table(const Report& report);

// Scores an assignment against the truth and fills a Report, including a
// Monte Carlo random baseline. Throws InputError when K or T disagree between
// the three inputs.
Report make_report(const TraceHeader& header, const AssignmentFile& assignment,
                   const TruthSidecar& truth, std::size_t baseline_trials = 1000);

}  // namespace fedprint

#endif  // FEDPRINT_EXPERIMENT_H_
