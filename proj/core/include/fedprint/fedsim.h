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

#ifndef FEDPRINT_FEDSIM_H_
#define FEDPRINT_FEDSIM_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedprint/corpus.h"
#include "fedprint/dp.h"
#include "fedprint/langmodel.h"
#include "fedprint/numerics.h"
#include "fedprint/rng.h"
#include "json.hpp"

namespace fedprint {

struct FedConfig {
  std::size_t clients = 3;  // K
  std::size_t rounds = 10;  // T
  double client_lr = 0.1;
  double server_lr = 1.0;   // lambda
  std::size_t local_epochs = 1;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

// What a client hands to the shuffler.
struct ClientUpdate {
  int client_id = 0;
  Gradients payload;
};

// What leaves the shuffler: the identity is gone, only a slot remains.
struct UpdatePacket {
  Gradients payload;
  std::size_t round = 0;
  std::size_t slot = 0;
};

struct ShuffledRound {
  std::vector<UpdatePacket> packets;  // packets[s].slot == s
  std::vector<int> permutation;       // slot -> client id
};

struct LayerSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct DpSummary {
  DpConfig config;
  double sample_rate = 0.0;
  std::size_t steps = 0;
  double epsilon = kInfiniteEpsilon;
};

struct TraceHeader {
  int format_version = 1;
  std::size_t clients = 0;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::vector<LayerSpec> layer_manifest;
  std::optional<DpSummary> dp;
  // Optional run metadata; not needed by any attack.
  nlohmann::json config;
  Vector loss_curve;
};

struct TraceRecord {
  std::size_t round = 0;
  std::size_t slot = 0;
  std::vector<Vector> layers;  // aligned with the header's layer manifest
};

// The server's view of a run: K anonymized packets per round. Values are
// stored at 32-bit precision, exactly as they are persisted on disk.
class TraceStore {
 public:
  TraceStore() = default;
  explicit TraceStore(TraceHeader header) : header_(std::move(header)) {}

  const TraceHeader& header() const { return header_; }
  TraceHeader& mutable_header() { return header_; }
  const std::vector<TraceRecord>& records() const { return records_; }

  std::size_t clients() const { return header_.clients; }
  std::size_t rounds() const { return header_.rounds; }

  // Extracts the manifest layers of `packet.payload` at 32-bit precision.
  void record(const UpdatePacket& packet);
  // Appends a record read from storage. Records must arrive in (round, slot)
  // order.
  void append(TraceRecord record);

  const TraceRecord& at(std::size_t round, std::size_t slot) const;
  // Index of `name` in the manifest; throws UsageError when absent.
  std::size_t layer_index(const std::string& name) const;

  // Throws InputError unless the store holds exactly K records per round,
  // slots 0..K-1 in order, rounds 0..T-1 contiguous.
  void validate_complete() const;

 private:
  TraceHeader header_;
  std::vector<TraceRecord> records_;
};

struct TruthSidecar {
  std::vector<std::vector<int>> rounds;  // rounds[t][slot] = client id

  void validate(std::size_t clients) const;
  // Per-record true label, ordered (round asc, slot asc).
  std::vector<int> labels() const;
};

struct ClientStreams {
  std::uint64_t batch_seed = 0;
  std::uint64_t dp_seed = 0;
};

// Batching depends on (client, local epoch) only, so a frozen model sees
// identical batches every round. DP noise is fresh per (client, round).
ClientStreams client_streams(std::uint64_t master, int client_id,
                             std::size_t round);

// Local SGD on a replica of the snapshot; returns snapshot - replica.
Gradients client_round(const GlobalModel& snapshot, const ClientShard& shard,
                       const FedConfig& cfg, const DpConfig* dp,
                       const ClientStreams& streams);

// Fisher-Yates permutation of the updates; slot s receives client
// permutation[s].
ShuffledRound shuffle_round(std::vector<ClientUpdate> updates, std::size_t round,
                            Rng& rng);

// Theta - lambda * mean(payloads). Payloads are reduced in a canonical
// content order, so the result does not depend on slot assignment.
GlobalModel aggregate(const GlobalModel& global,
                      std::span<const UpdatePacket> packets, double server_lr);

// run_simulation raises DivergedError when the evaluation loss is non-finite
// or exceeds this multiple of ln(vocab_size).
inline constexpr double kDivergenceLossFactor = 100.0;

struct SimulationOptions {
  // Layers persisted in the trace; "all:both" keeps every FC/Proj weight.
  LayerSelector record = LayerSelector::parse("all:both");
  std::size_t threads = 1;
};

struct SimulationResult {
  TraceStore trace;
  TruthSidecar truth;
  Vector loss_curve;  // eval loss on the pooled validation split after each round
  GlobalModel final_model;
};

// Throws DivergedError when the evaluation loss becomes non-finite.
SimulationResult run_simulation(const FedConfig& fed, const ModelConfig& model,
                                const Corpus& corpus,
                                const std::optional<DpConfig>& dp,
                                const SimulationOptions& options = {});

}  // namespace fedprint

#endif  // FEDPRINT_FEDSIM_H_
