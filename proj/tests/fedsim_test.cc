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

#include "fedprint/fedsim.h"

#include <cmath>
#include <set>

#include "fedprint/corpus.h"
#include "fedprint/errors.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedprint {
namespace {

struct SimSetup {
  FedConfig fed;
  ModelConfig model;
  Corpus corpus;
};

SimSetup small_setup(std::size_t clients = 3, std::size_t rounds = 4) {
  SimSetup s;
  s.fed.clients = clients;
  s.fed.rounds = rounds;
  s.fed.batch_size = 8;
  s.fed.seed = 5;
  s.model.embed_dim = 8;
  s.model.context = 3;
  s.model.n_blocks = 2;
  s.model.ffn_mult = 2;
  SyntheticSpec spec;
  spec.n_clients = clients;
  spec.train_sentences = 6;
  spec.valid_sentences = 2;
  spec.topic_vocab_size = 10;
  spec.shared_vocab_size = 4;
  s.corpus = generate_synthetic(spec, 11);
  s.model.vocab_size = s.corpus.vocab.size();
  return s;
}

TEST(FedConfig, Validate) {
  EXPECT_NO_THROW(FedConfig{}.validate());
  FedConfig c;
  c.clients = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FedConfig{};
  c.rounds = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FedConfig{};
  c.client_lr = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FedConfig{};
  c.server_lr = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.server_lr = std::nan("");
  EXPECT_THROW(c.validate(), ConfigError);
}

std::vector<ClientUpdate> tagged_updates(const ModelConfig& cfg, std::size_t k) {
  std::vector<ClientUpdate> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i].client_id = static_cast<int>(i);
    out[i].payload = ParameterSet::zeros(cfg);
    out[i].payload.output_bias[0] = double(i);
  }
  return out;
}

TEST(Shuffle, PermutationTracksPayloads) {
  const SimSetup s = small_setup();
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ShuffledRound r = shuffle_round(tagged_updates(s.model, 5), 7, rng);
    std::set<int> ids(r.permutation.begin(), r.permutation.end());
    EXPECT_EQ(ids.size(), 5u);
    for (std::size_t slot = 0; slot < 5; ++slot) {
      EXPECT_EQ(r.packets[slot].slot, slot);
      EXPECT_EQ(r.packets[slot].round, 7u);
      EXPECT_EQ(r.packets[slot].payload.output_bias[0], double(r.permutation[slot]));
    }
  }
}

// Every (slot, client) cell is equally likely. Chi-square over 16 cells with
// 9 degrees of freedom; 27.88 is the 0.999 quantile.
TEST(Shuffle, UniformOverPermutations) {
  const SimSetup s = small_setup();
  Rng rng(8);
  const std::size_t k = 4;
  const int n = 20000;
  std::vector<int> counts(k * k, 0);
  const auto base = tagged_updates(s.model, k);
  for (int i = 0; i < n; ++i) {
    const ShuffledRound r = shuffle_round(base, 0, rng);
    for (std::size_t slot = 0; slot < k; ++slot) ++counts[slot * k + r.permutation[slot]];
  }
  const double expected = double(n) / k;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 27.88);
}

TEST(Aggregate, ServerStepOnMeanPayload) {
  const SimSetup s = small_setup();
  const GlobalModel g = init_model(s.model, 1);
  std::vector<UpdatePacket> packets;
  for (std::size_t i = 0; i < 3; ++i) {
    Gradients p = ParameterSet::zeros(s.model);
    p.add_scaled(init_model(s.model, 10 + i).params, 1.0);
    packets.push_back({p, 0, i});
  }
  EXPECT_EQ(aggregate(g, packets, 0.0), g);
  const GlobalModel next = aggregate(g, packets, 0.5);
  const Vector before = g.params.flatten(), after = next.params.flatten();
  const Vector a = packets[0].payload.flatten(), b = packets[1].payload.flatten(),
               c = packets[2].payload.flatten();
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_NEAR(after[i], before[i] - 0.5 * (a[i] + b[i] + c[i]) / 3.0, 1e-15);
  }
  EXPECT_THROW(aggregate(g, std::vector<UpdatePacket>{}, 1.0), UsageError);
}

// Property: aggregation is bitwise independent of packet order.
TEST(Aggregate, PermutationInvariantBitwise) {
  const SimSetup s = small_setup();
  const GlobalModel g = init_model(s.model, 1);
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(6);
    std::vector<UpdatePacket> packets;
    for (std::size_t i = 0; i < k; ++i) {
      Gradients p = ParameterSet::zeros(s.model);
      p.for_each([&](const std::string&, std::span<double> v) {
        for (double& x : v) x = rng.normal() * std::exp(rng.uniform(-20.0, 5.0));
      });
      packets.push_back({p, 0, i});
    }
    const GlobalModel ref = aggregate(g, packets, 0.7);
    for (std::size_t i = k; i > 1; --i) std::swap(packets[i - 1], packets[rng.uniform_index(i)]);
    EXPECT_EQ(aggregate(g, packets, 0.7), ref);
  }
}

TEST(ClientRound, DeterministicPayload) {
  const SimSetup s = small_setup();
  const GlobalModel g = init_model(s.model, 1);
  const ClientStreams streams = client_streams(5, 1, 0);
  const Gradients a = client_round(g, s.corpus.shards[1], s.fed, nullptr, streams);
  EXPECT_EQ(client_round(g, s.corpus.shards[1], s.fed, nullptr, streams), a);
  EXPECT_GT(a.squared_norm(), 0.0);
  EXPECT_NE(client_round(g, s.corpus.shards[0], s.fed, nullptr, streams), a);
}

// With an inactive clip bound and no noise, the DP path is plain SGD up to
// summation order.
TEST(ClientRound, InactiveDpMatchesPlainSgd) {
  const SimSetup s = small_setup();
  const GlobalModel g = init_model(s.model, 1);
  const ClientStreams streams = client_streams(5, 2, 1);
  const DpConfig dp{1e9, 0.0, 1e-4};
  const Vector plain =
      client_round(g, s.corpus.shards[2], s.fed, nullptr, streams).flatten();
  const Vector priv = client_round(g, s.corpus.shards[2], s.fed, &dp, streams).flatten();
  for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_NEAR(priv[i], plain[i], 1e-12);
}

TEST(ClientRound, NoWindowsIsConfigError) {
  SimSetup s = small_setup();
  s.model.context = 40;
  const GlobalModel g = init_model(s.model, 1);
  EXPECT_THROW(client_round(g, s.corpus.shards[0], s.fed, nullptr, client_streams(1, 0, 0)),
               ConfigError);
}

TEST(RunSimulation, TraceAndTruthShape) {
  const SimSetup s = small_setup(3, 4);
  const SimulationResult r = run_simulation(s.fed, s.model, s.corpus, std::nullopt);
  EXPECT_EQ(r.trace.records().size(), 12u);
  ASSERT_EQ(r.truth.rounds.size(), 4u);
  EXPECT_NO_THROW(r.truth.validate(3));
  EXPECT_NO_THROW(r.trace.validate_complete());
  EXPECT_EQ(r.loss_curve.size(), 4u);
  EXPECT_EQ(r.trace.header().loss_curve, r.loss_curve);
  const auto& m = r.trace.header().layer_manifest;
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m[0], (LayerSpec{"block1.fc", 16, 24}));
  EXPECT_EQ(m[3], (LayerSpec{"block2.proj", 8, 16}));
  for (const auto& rec : r.trace.records()) {
    for (const auto& layer : rec.layers) {
      for (double v : layer) EXPECT_EQ(v, double(float(v)));
    }
  }
}

TEST(RunSimulation, RecordsOnlySelectedLayers) {
  const SimSetup s = small_setup();
  SimulationOptions o;
  o.record = LayerSelector::parse("2:proj");
  const SimulationResult r = run_simulation(s.fed, s.model, s.corpus, std::nullopt, o);
  ASSERT_EQ(r.trace.header().layer_manifest.size(), 1u);
  EXPECT_EQ(r.trace.records()[0].layers[0].size(), 8u * 16u);
  EXPECT_EQ(r.trace.layer_index("block2.proj"), 0u);
  EXPECT_THROW(r.trace.layer_index("block1.fc"), UsageError);
}

TEST(RunSimulation, ThreadCountDoesNotChangeResult) {
  const SimSetup s = small_setup();
  SimulationOptions o;
  o.threads = 3;
  const SimulationResult a = run_simulation(s.fed, s.model, s.corpus, std::nullopt);
  const SimulationResult b = run_simulation(s.fed, s.model, s.corpus, std::nullopt, o);
  EXPECT_EQ(a.final_model, b.final_model);
  EXPECT_EQ(a.truth.rounds, b.truth.rounds);
}

TEST(RunSimulation, ShuffleLeavesModelUnchanged) {
  SimSetup s = small_setup(5, 5);
  const SimulationResult shuffled = run_simulation(s.fed, s.model, s.corpus, std::nullopt);
  s.fed.shuffle = false;
  const SimulationResult plain = run_simulation(s.fed, s.model, s.corpus, std::nullopt);
  const Vector a = shuffled.final_model.params.flatten(), b = plain.final_model.params.flatten();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(plain.truth.rounds[t][k], int(k));
  }
}

// A frozen global model makes each client send the same payload every round.
TEST(RunSimulation, FrozenModelRepeatsPayloads) {
  SimSetup s = small_setup(3, 3);
  s.fed.server_lr = 0.0;
  const SimulationResult r = run_simulation(s.fed, s.model, s.corpus, std::nullopt);
  for (std::size_t t = 1; t < 3; ++t) {
    for (std::size_t slot = 0; slot < 3; ++slot) {
      const int client = r.truth.rounds[t][slot];
      std::size_t first = 0;
      while (r.truth.rounds[0][first] != client) ++first;
      EXPECT_EQ(r.trace.at(t, slot).layers, r.trace.at(0, first).layers);
    }
  }
}

TEST(RunSimulation, DpSummaryInHeader) {
  const SimSetup s = small_setup();
  const SimulationResult r =
      run_simulation(s.fed, s.model, s.corpus, DpConfig{0.5, 1.0, 1e-4});
  ASSERT_TRUE(r.trace.header().dp.has_value());
  const DpSummary& d = *r.trace.header().dp;
  EXPECT_GT(d.sample_rate, 0.0);
  EXPECT_LE(d.sample_rate, 1.0);
  EXPECT_GT(d.steps, 0u);
  EXPECT_TRUE(std::isfinite(d.epsilon));
}

TEST(RunSimulation, RejectsMismatchedCorpus) {
  SimSetup s = small_setup(3, 2);
  s.fed.clients = 4;
  EXPECT_THROW(run_simulation(s.fed, s.model, s.corpus, std::nullopt), ConfigError);
}

TEST(RunSimulation, AggressiveRunDiverges) {
  SimSetup s = small_setup(3, 4);
  s.fed.client_lr = 1.0;
  s.fed.server_lr = 10.0;
  EXPECT_THROW(run_simulation(s.fed, s.model, s.corpus, DpConfig{10.0, 1.5, 1e-4}),
               DivergedError);
}

TEST(TraceStore, AppendChecksOrderAndShape) {
  TraceHeader h;
  h.clients = 2;
  h.rounds = 2;
  h.layer_manifest = {LayerSpec{"block1.fc", 1, 2}};
  TraceStore store(h);
  EXPECT_THROW(store.append(TraceRecord{0, 1, {{1.0, 2.0}}}), InputError);
  EXPECT_THROW(store.append(TraceRecord{0, 0, {{1.0}}}), InputError);
  EXPECT_THROW(store.append(TraceRecord{0, 0, {}}), InputError);
  store.append(TraceRecord{0, 0, {{1.0, 2.0}}});
  store.append(TraceRecord{0, 1, {{1.0, 2.0}}});
  EXPECT_THROW(store.validate_complete(), InputError);
  EXPECT_THROW(store.at(0, 2), UsageError);
}

TEST(TruthSidecar, Validate) {
  TruthSidecar t{{{0, 1}, {1, 0}}};
  EXPECT_NO_THROW(t.validate(2));
  EXPECT_EQ(t.labels(), (std::vector<int>{0, 1, 1, 0}));
  EXPECT_THROW((TruthSidecar{{{0, 0}}}).validate(2), InputError);
  EXPECT_THROW((TruthSidecar{{{0, 2}}}).validate(2), InputError);
  EXPECT_THROW((TruthSidecar{{{0}}}).validate(2), InputError);
}

}  // namespace
}  // namespace fedprint
