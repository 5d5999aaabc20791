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

#include "fedprint/commands.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "fedprint/errors.h"
#include "fedprint/parallel.h"

namespace fedprint {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
}

// Attack parameters: explicit flag, else the config echoed in the trace,
// else the defaults.
struct AttackChoice {
  AttackMethod method = AttackMethod::kGreedy;
  LayerSelector selector = LayerSelector::parse("1:both");
  std::uint64_t seed = 0;
};

AttackChoice resolve_attack(const TraceHeader& header,
                            const std::optional<std::string>& method,
                            const std::optional<std::string>& selector,
                            const std::optional<std::uint64_t>& seed) {
  AttackChoice c;
  c.seed = seed.value_or(header.seed);
  std::string m = "greedy";
  std::string s = "1:both";
  if (header.config.is_object() && header.config.contains("attack")) {
    const json& a = header.config.at("attack");
    m = a.value("method", m);
    s = a.value("selector", s);
  }
  c.method = parse_attack_method(method.value_or(m));
  c.selector = LayerSelector::parse(selector.value_or(s));
  return c;
}

AssignmentFile attack_trace(const TraceStore& trace, const AttackChoice& choice) {
  const FeatureMatrix features = build_features(trace, choice.selector);
  AssignmentFile file;
  file.method = to_string(choice.method);
  file.selector = choice.selector.to_string();
  file.seed = choice.seed;
  file.assignment = run_attack(features, choice.method, choice.seed);
  return file;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw InputError(path.string() + ": write failed");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string axis_value_text(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

const std::map<std::string, std::pair<const char*, const char*>>& axis_paths() {
  static const std::map<std::string, std::pair<const char*, const char*>> paths = {
      {"server_lr", {"fed", "server_lr"}}, {"rounds", {"fed", "rounds"}},
      {"clients", {"fed", "clients"}},     {"clip", {"dp", "clip"}},
      {"sigma", {"dp", "sigma"}},          {"method", {"attack", "method"}},
      {"selector", {"attack", "selector"}}};
  return paths;
}

std::string cell_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cell_%04zu", index);
  return buf;
}

}  // namespace

std::filesystem::path default_sidecar_path(const std::filesystem::path& trace) {
  return std::filesystem::path(trace.string() + ".truth.json");
}

SimulationResult cmd_simulate(const SimulateArgs& args, std::ostream& log) {
  ExperimentConfig config = load_experiment_config(args.config);
  if (args.seed) {
    config.seed = *args.seed;
    config.fed.seed = *args.seed;
  }
  SimulationResult result = simulate_experiment(config, args.threads);
  const auto sidecar = args.sidecar_out.value_or(default_sidecar_path(args.trace_out));
  write_trace(result.trace, args.trace_out);
  write_truth(result.truth, sidecar);

  log << "simulated K=" << config.fed.clients << " T=" << config.fed.rounds
      << " seed=" << config.seed << "\n";
  log << "eval loss per round:";
  for (double l : result.loss_curve) log << " " << csv_number(l);
  log << "\n";
  log << "trace: " << args.trace_out.string() << " (" << result.trace.records().size()
      << " records)\n";
  log << "truth sidecar: " << sidecar.string() << "\n";
  return result;
}

AssignmentFile cmd_attack(const AttackArgs& args, std::ostream& log) {
  const TraceStore trace = read_trace(args.trace);
  const AttackChoice choice =
      resolve_attack(trace.header(), args.method, args.selector, args.seed);
  AssignmentFile file = attack_trace(trace, choice);
  write_assignment(file, args.out);
  log << "attack " << file.method << " on " << file.selector << ": "
      << file.assignment.labels.size() << " records -> " << args.out.string() << "\n";
  return file;
}

Report cmd_report(const ReportArgs& args, std::ostream& log) {
  const auto start = Clock::now();
  const TraceStore trace = read_trace(args.trace);
  AssignmentFile assignment;
  if (args.assignment) {
    assignment = read_assignment(*args.assignment);
  } else {
    assignment = attack_trace(
        trace, resolve_attack(trace.header(), args.method, args.selector, args.seed));
  }
  const TruthSidecar truth =
      read_truth(args.sidecar.value_or(default_sidecar_path(args.trace)));
  Report report = make_report(trace.header(), assignment, truth);
  report.wall_clock_seconds = seconds_since(start);
  if (args.out) write_text(*args.out, report_to_json(report).dump(2) + "\n");
  log << render_report_table(report);
  return report;
}

SweepGrid parse_sweep_grid(const json& j) {
  if (!j.is_object()) throw UsageError("sweep grid: expected an object");
  SweepGrid grid;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "base" && it.key() != "axes" && it.key() != "keep_traces") {
      throw ConfigError(it.key() + ": unknown key in sweep grid");
    }
  }
  if (!j.contains("base") || !j.at("base").is_object()) {
    throw ConfigError("base: sweep grid needs a base config object");
  }
  grid.base = j.at("base");
  if (j.contains("keep_traces")) {
    if (!j.at("keep_traces").is_boolean()) throw ConfigError("keep_traces: expected a bool");
    grid.keep_traces = j.at("keep_traces").get<bool>();
  }
  if (!j.contains("axes") || !j.at("axes").is_object() || j.at("axes").empty()) {
    throw UsageError("sweep grid has no axes");
  }
  for (auto it = j.at("axes").begin(); it != j.at("axes").end(); ++it) {
    if (!axis_paths().contains(it.key())) {
      throw ConfigError("axes." + it.key() + ": unknown sweep axis");
    }
    if (!it->is_array() || it->empty()) {
      throw UsageError("axes." + it.key() + ": needs a non-empty list of values");
    }
    grid.axes.emplace_back(it.key(), it->get<std::vector<json>>());
  }
  return grid;
}

std::vector<SweepCell> expand_grid(const SweepGrid& grid) {
  if (grid.axes.empty()) throw UsageError("sweep grid has no axes");
  std::size_t total = 1;
  for (const auto& [name, values] : grid.axes) {
    if (values.empty()) throw UsageError("axes." + name + ": empty");
    total *= values.size();
  }
  std::vector<SweepCell> cells(total);
  for (std::size_t i = 0; i < total; ++i) {
    SweepCell& cell = cells[i];
    cell.index = i;
    cell.config = grid.base;
    std::size_t rest = i;
    std::vector<std::size_t> pick(grid.axes.size());
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
      pick[a] = rest % grid.axes[a].second.size();
      rest /= grid.axes[a].second.size();
    }
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      const auto& [name, values] = grid.axes[a];
      const json& v = values[pick[a]];
      cell.axis_values.emplace_back(name, v);
      const auto& [section, key] = axis_paths().at(name);
      json& target = cell.config[section];
      if (target.is_null()) target = json::object();
      target[key] = v;
    }
  }
  return cells;
}

std::vector<SweepRow> cmd_sweep(const SweepArgs& args, std::ostream& log) {
  const SweepGrid grid = parse_sweep_grid(read_json_file(args.grid));
  std::vector<SweepCell> cells = expand_grid(grid);
  if (args.seed) {
    for (auto& c : cells) c.config["seed"] = *args.seed;
  }

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::optional<ExperimentConfig>> configs(cells.size());
  std::vector<std::string> hashes(cells.size());
  // Cells that differ only in attack settings share one simulation.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    rows[i].cell = i;
    try {
      configs[i] = parse_experiment_config(cells[i].config);
      hashes[i] = config_hash(*configs[i]);
      json key = to_json(*configs[i]);
      key.erase("attack");
      groups[key.dump()].push_back(i);
    } catch (const Error& e) {
      rows[i].status = "config_error";
      rows[i].error = e.what();
    }
  }
  std::vector<std::vector<std::size_t>> work;
  for (auto& [key, members] : groups) work.push_back(std::move(members));

  std::filesystem::create_directories(args.out_dir);
  parallel_for(work.size(), args.jobs, [&](std::size_t g) {
    const std::vector<std::size_t>& members = work[g];
    const auto sim_start = Clock::now();
    std::optional<SimulationResult> sim;
    try {
      sim = simulate_experiment(*configs[members.front()]);
    } catch (const DivergedError& e) {
      for (std::size_t i : members) rows[i] = {i, "diverged", e.what(), std::nullopt};
    } catch (const ConfigError& e) {
      for (std::size_t i : members) rows[i] = {i, "config_error", e.what(), std::nullopt};
    } catch (const std::exception& e) {
      for (std::size_t i : members) rows[i] = {i, "error", e.what(), std::nullopt};
    }
    const double sim_seconds = seconds_since(sim_start);
    for (std::size_t i : members) {
      const std::filesystem::path dir = args.out_dir / cell_name(i);
      std::filesystem::create_directories(dir);
      write_text(dir / "config.json", to_json(*configs[i]).dump(2) + "\n");
      if (!sim) continue;
      try {
        const auto start = Clock::now();
        const ExperimentConfig& cfg = *configs[i];
        AttackChoice choice;
        choice.method = cfg.attack.method;
        choice.selector = cfg.attack.selector;
        choice.seed = cfg.seed;
        const AssignmentFile assignment = attack_trace(sim->trace, choice);
        TraceHeader header = sim->trace.header();
        header.config = to_json(cfg);
        Report report = make_report(header, assignment, sim->truth);
        report.wall_clock_seconds = sim_seconds + seconds_since(start);
        write_text(dir / "report.json", report_to_json(report).dump(2) + "\n");
        write_text(dir / "report.txt", render_report_table(report));
        if (grid.keep_traces) {
          write_trace(sim->trace, dir / "trace.jsonl");
          write_truth(sim->truth, default_sidecar_path(dir / "trace.jsonl"));
        }
        rows[i] = {i, "ok", "", std::move(report)};
      } catch (const std::exception& e) {
        rows[i] = {i, "error", e.what(), std::nullopt};
      }
    }
  });

  std::ostringstream csv;
  csv << "cell";
  for (const auto& [name, values] : grid.axes) csv << "," << name;
  csv << ",seed,config_hash,status,purity,rand_index,mutual_information,"
         "random_purity,random_rand_index,random_mutual_information,final_loss,"
         "epsilon,error\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepRow& row = rows[i];
    csv << i;
    for (const auto& [name, value] : cells[i].axis_values) {
      csv << "," << csv_field(axis_value_text(value));
    }
    csv << "," << (configs[i] ? std::to_string(configs[i]->seed) : "") << ","
        << hashes[i] << "," << row.status;
    if (row.report) {
      const Report& r = *row.report;
      csv << "," << csv_number(r.scores.purity) << "," << csv_number(r.scores.rand_index)
          << "," << csv_number(r.scores.mutual_information) << ","
          << csv_number(r.baseline.purity) << "," << csv_number(r.baseline.rand_index)
          << "," << csv_number(r.baseline.mutual_information) << ","
          << (r.loss_curve.empty() ? "" : csv_number(r.loss_curve.back())) << ","
          << (r.dp ? csv_number(r.dp->epsilon) : "");
    } else {
      csv << ",,,,,,,,";
    }
    csv << "," << csv_field(row.error) << "\n";
    log << cell_name(i) << ": " << row.status;
    if (row.report) {
      log << " purity=" << csv_number(row.report->scores.purity)
          << " MI=" << csv_number(row.report->scores.mutual_information);
    } else if (!row.error.empty()) {
      log << " (" << row.error << ")";
    }
    log << "\n";
  }
  write_text(args.out_dir / "summary.csv", csv.str());
  return rows;
}

}  // namespace fedprint
