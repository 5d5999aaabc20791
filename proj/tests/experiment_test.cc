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

#include "fedprint/experiment.h"

#include "fedprint/errors.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedprint {
namespace {

using json = nlohmann::json;

json minimal_config() {
  return json::parse(R"({
    "seed": 3,
    "fed": {"clients": 3, "rounds": 2, "batch_size": 8},
    "model": {"embed_dim": 4, "context": 2, "n_blocks": 2, "ffn_mult": 2},
    "data": {"synthetic": {"train_sentences": 4, "valid_sentences": 1}}
  })");
}

std::string config_error(const json& j) {
  try {
    parse_experiment_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ExperimentConfig, ParsesAndFillsDefaults) {
  const ExperimentConfig c = parse_experiment_config(minimal_config());
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.fed.seed, 3u);
  EXPECT_EQ(c.fed.clients, 3u);
  EXPECT_EQ(c.fed.client_lr, 0.1);
  EXPECT_EQ(c.fed.local_epochs, 1u);
  ASSERT_TRUE(c.data.synthetic.has_value());
  EXPECT_EQ(c.data.synthetic->n_clients, 3u);
  EXPECT_FALSE(c.dp.has_value());
  EXPECT_EQ(c.attack.method, AttackMethod::kGreedy);
  EXPECT_EQ(c.trace_layers.to_string(), "all:both");
}

TEST(ExperimentConfig, JsonRoundTripAndHash) {
  json j = minimal_config();
  j["dp"] = {{"clip", 0.5}, {"sigma", 1.0}};
  j["attack"] = {{"method", "spectral"}, {"selector", "2:proj"}};
  const ExperimentConfig c = parse_experiment_config(j);
  const json canonical = to_json(c);
  const ExperimentConfig back = parse_experiment_config(canonical);
  EXPECT_EQ(to_json(back), canonical);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  json other = j;
  other["seed"] = 4;
  EXPECT_NE(config_hash(parse_experiment_config(other)), config_hash(c));
}

TEST(ExperimentConfig, ErrorsNameTheField) {
  json j = minimal_config();
  j["fed"]["server_lrr"] = 1.0;
  EXPECT_NE(config_error(j).find("fed.server_lrr"), std::string::npos);

  j = minimal_config();
  j["fed"]["server_lr"] = "fast";
  EXPECT_NE(config_error(j).find("fed.server_lr"), std::string::npos);

  j = minimal_config();
  j["fed"]["server_lr"] = -1.0;
  EXPECT_NE(config_error(j).find("fed.server_lr"), std::string::npos);

  j = minimal_config();
  j["model"]["n_blocks"] = -2;
  EXPECT_NE(config_error(j).find("model.n_blocks"), std::string::npos);

  j = minimal_config();
  j["extra"] = true;
  EXPECT_NE(config_error(j).find("extra"), std::string::npos);

  j = minimal_config();
  j["attack"] = {{"selector", "5:fc"}};
  EXPECT_NE(config_error(j).find("attack.selector"), std::string::npos);

  j = minimal_config();
  j["attack"] = {{"method", "magic"}};
  EXPECT_NE(config_error(j).find("attack.method"), std::string::npos);

  j = minimal_config();
  j["dp"] = {{"clip", 0.0}};
  EXPECT_NE(config_error(j).find("dp.clip"), std::string::npos);

  j = minimal_config();
  j["data"]["files"] = json::array({"a.txt"});
  EXPECT_NE(config_error(j).find("data"), std::string::npos);

  j = minimal_config();
  j["trace"] = {{"layers", "2:fc"}};
  EXPECT_NE(config_error(j).find("attack.selector"), std::string::npos);
}

TEST(ExperimentConfig, LoadFromFile) {
  const auto dir = testing::scratch_dir("experiment_load");
  testing::spit(dir / "c.json", minimal_config().dump());
  EXPECT_EQ(load_experiment_config(dir / "c.json").fed.rounds, 2u);
  testing::spit(dir / "bad.json", "{");
  EXPECT_THROW(load_experiment_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_experiment_config(dir / "missing.json"), ConfigError);
}

TEST(ExperimentConfig, TextFilesNeedOnePerClient) {
  const auto dir = testing::scratch_dir("experiment_files");
  json j = minimal_config();
  j["data"] = {{"files", {(dir / "a.txt").string(), (dir / "b.txt").string(),
                          (dir / "c.txt").string()}},
               {"valid_sentences", 1},
               {"min_count", 1}};
  for (const char* name : {"a.txt", "b.txt", "c.txt"}) {
    testing::spit(dir / name, std::string("the cat sat on ") + name + "\nthe dog ran\nthe end\n");
  }
  const ExperimentConfig c = parse_experiment_config(j);
  const Corpus corpus = build_corpus(c);
  EXPECT_EQ(corpus.shards.size(), 3u);
  std::filesystem::remove(dir / "c.txt");
  EXPECT_THROW(build_corpus(c), ConfigError);
}

TEST(ExperimentConfig, SimulateEchoesConfig) {
  const ExperimentConfig c = parse_experiment_config(minimal_config());
  const SimulationResult r = simulate_experiment(c);
  EXPECT_EQ(r.trace.header().config, to_json(c));
  EXPECT_EQ(r.trace.records().size(), 6u);
}

Report sample_report() {
  const ExperimentConfig c = parse_experiment_config(minimal_config());
  const SimulationResult r = simulate_experiment(c);
  AssignmentFile a;
  a.method = "greedy";
  a.selector = "1:both";
  a.assignment = run_attack(build_features(r.trace, c.attack.selector),
                            AttackMethod::kGreedy, 0);
  return make_report(r.trace.header(), a, r.truth, 200);
}

TEST(Report, JsonRoundTripRendersIdentically) {
  Report rep = sample_report();
  rep.wall_clock_seconds = 1.25;
  const json j = report_to_json(rep);
  const Report back = report_from_json(json::parse(j.dump()));
  EXPECT_EQ(render_report_table(back), render_report_table(rep));
  EXPECT_EQ(report_to_json(back), j);
  EXPECT_EQ(j["K"], 3);
  EXPECT_EQ(j["random_baseline"]["trials"], 200);
  EXPECT_TRUE(j["dp"].is_null());
}

TEST(Report, PerfectAndConstantAssignments) {
  TraceHeader h;
  h.clients = 3;
  h.rounds = 2;
  const TruthSidecar truth{{{2, 0, 1}, {1, 2, 0}}};
  AssignmentFile a;
  a.method = "greedy";
  a.selector = "1:both";
  a.assignment = ClusterAssignment{2, 3, {5, 3, 4, 4, 5, 3}};
  const Report perfect = make_report(h, a, truth, 100);
  EXPECT_EQ(perfect.scores.purity, 1.0);
  EXPECT_EQ(perfect.scores.rand_index, 1.0);
  EXPECT_NEAR(perfect.scores.mutual_information, std::log(3.0), 1e-12);
  a.assignment.labels.assign(6, 0);
  const Report flat = make_report(h, a, truth, 100);
  EXPECT_DOUBLE_EQ(flat.scores.purity, 1.0 / 3.0);
  EXPECT_EQ(flat.scores.mutual_information, 0.0);
  const std::string table = render_report_table(flat);
  EXPECT_NE(table.find("Pur."), std::string::npos);
  EXPECT_NE(table.find("random"), std::string::npos);
}

TEST(Report, InconsistentInputs) {
  TraceHeader h;
  h.clients = 3;
  h.rounds = 2;
  AssignmentFile a;
  a.assignment = ClusterAssignment{2, 3, {0, 1, 2, 0, 1, 2}};
  EXPECT_THROW(make_report(h, a, TruthSidecar{{{0, 1, 2}}}, 10), InputError);
  EXPECT_THROW(make_report(h, a, TruthSidecar{{{0, 1}, {0, 1}}}, 10), InputError);
  a.assignment.clients = 2;
  EXPECT_THROW(make_report(h, a, TruthSidecar{{{0, 1, 2}, {0, 1, 2}}}, 10), InputError);
}

}  // namespace
}  // namespace fedprint
