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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fedprint/errors.h"
#include "fedprint/parallel.h"

namespace fedprint {
namespace {

Vector quantize(std::span<const double> values) {
  Vector out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<double>(static_cast<float>(values[i]));
  }
  return out;
}

// Lexicographic order on payload contents.
bool content_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

void FedConfig::validate() const {
  if (clients < 2) throw ConfigError("fed.clients: need K >= 2");
  if (rounds < 2) throw ConfigError("fed.rounds: need T >= 2");
  if (!(client_lr > 0.0)) throw ConfigError("fed.client_lr: must be > 0");
  if (!(server_lr >= 0.0) || !std::isfinite(server_lr)) {
    throw ConfigError("fed.server_lr: must be a finite number >= 0");
  }
  if (batch_size < 1) throw ConfigError("fed.batch_size: must be >= 1");
}

void TraceStore::record(const UpdatePacket& packet) {
  TraceRecord rec;
  rec.round = packet.round;
  rec.slot = packet.slot;
  for (const LayerSpec& spec : header_.layer_manifest) {
    const Matrix& w = linear_weight(packet.payload, spec.name);
    if (w.rows() != spec.rows || w.cols() != spec.cols) {
      throw UsageError("TraceStore::record: layer " + spec.name +
                       " does not match the manifest shape");
    }
    rec.layers.push_back(quantize(w.flat()));
  }
  append(std::move(rec));
}

void TraceStore::append(TraceRecord record) {
  const std::size_t k = header_.clients;
  const std::size_t expected_round = k == 0 ? 0 : records_.size() / k;
  const std::size_t expected_slot = k == 0 ? 0 : records_.size() % k;
  if (record.round != expected_round || record.slot != expected_slot) {
    throw InputError("trace record (" + std::to_string(record.round) + ", " +
                     std::to_string(record.slot) + ") out of order; expected (" +
                     std::to_string(expected_round) + ", " +
                     std::to_string(expected_slot) + ")");
  }
  if (record.layers.size() != header_.layer_manifest.size()) {
    throw InputError("trace record has " + std::to_string(record.layers.size()) +
                     " layers, manifest lists " +
                     std::to_string(header_.layer_manifest.size()));
  }
  for (std::size_t i = 0; i < record.layers.size(); ++i) {
    const LayerSpec& spec = header_.layer_manifest[i];
    if (record.layers[i].size() != spec.rows * spec.cols) {
      throw InputError("trace layer " + spec.name + " has " +
                       std::to_string(record.layers[i].size()) +
                       " values, expected " + std::to_string(spec.rows * spec.cols));
    }
  }
  records_.push_back(std::move(record));
}

const TraceRecord& TraceStore::at(std::size_t round, std::size_t slot) const {
  const std::size_t index = round * header_.clients + slot;
  if (slot >= header_.clients || index >= records_.size()) {
    throw UsageError("TraceStore::at: no record (" + std::to_string(round) + ", " +
                     std::to_string(slot) + ")");
  }
  return records_[index];
}

std::size_t TraceStore::layer_index(const std::string& name) const {
  const auto& m = header_.layer_manifest;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].name == name) return i;
  }
  throw UsageError("layer '" + name + "' is not stored in this trace");
}

void TraceStore::validate_complete() const {
  if (header_.clients < 1 || header_.rounds < 1) {
    throw InputError("trace header must have K >= 1 and T >= 1");
  }
  if (records_.size() != header_.clients * header_.rounds) {
    throw InputError("trace holds " + std::to_string(records_.size()) +
                     " records, expected K*T = " +
                     std::to_string(header_.clients * header_.rounds));
  }
}

void TruthSidecar::validate(std::size_t clients) const {
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    std::vector<bool> seen(clients, false);
    if (rounds[t].size() != clients) {
      throw InputError("truth round " + std::to_string(t) + " has " +
                       std::to_string(rounds[t].size()) + " slots, expected " +
                       std::to_string(clients));
    }
    for (int c : rounds[t]) {
      if (c < 0 || static_cast<std::size_t>(c) >= clients || seen[c]) {
        throw InputError("truth round " + std::to_string(t) +
                         " is not a permutation of [0, K)");
      }
      seen[c] = true;
    }
  }
}

std::vector<int> TruthSidecar::labels() const {
  std::vector<int> out;
  for (const auto& r : rounds) out.insert(out.end(), r.begin(), r.end());
  return out;
}

ClientStreams client_streams(std::uint64_t master, int client_id,
                             std::size_t round) {
  return ClientStreams{
      derive_seed(master, "batch", static_cast<std::uint64_t>(client_id)),
      derive_seed(master, "dp", static_cast<std::uint64_t>(client_id), round)};
}

Gradients client_round(const GlobalModel& snapshot, const ClientShard& shard,
                       const FedConfig& cfg, const DpConfig* dp,
                       const ClientStreams& streams) {
  if (windows_of(shard.train, snapshot.config.context).empty()) {
    throw ConfigError("client " + std::to_string(shard.client_id) +
                      " has no training windows (sentences shorter than context?)");
  }
  GlobalModel local = snapshot;
  Backprop bp(snapshot.config);
  Gradients grads = ParameterSet::zeros(snapshot.config);
  Gradients sample = ParameterSet::zeros(snapshot.config);
  std::optional<DpAccumulator> acc;
  if (dp != nullptr) acc.emplace(snapshot.config, *dp);
  Rng noise(streams.dp_seed);

  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    const auto batches =
        batch_iter(shard.train, cfg.batch_size, snapshot.config.context,
                   derive_seed(streams.batch_seed, "epoch", epoch));
    for (const Batch& batch : batches) {
      if (acc) {
        acc->reset();
        for (std::size_t i = 0; i < batch.size(); ++i) {
          sample.set_zero();
          bp.accumulate(local, batch.window(i), batch.target(i), 1.0, sample);
          acc->add(sample);
        }
        sgd_step_in_place(local, acc->release(noise), cfg.client_lr);
      } else {
        grads.set_zero();
        const double scale = 1.0 / static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
          bp.accumulate(local, batch.window(i), batch.target(i), scale, grads);
        }
        sgd_step_in_place(local, grads, cfg.client_lr);
      }
    }
  }

  Gradients payload = snapshot.params;
  payload.add_scaled(local.params, -1.0);
  return payload;
}

ShuffledRound shuffle_round(std::vector<ClientUpdate> updates, std::size_t round,
                            Rng& rng) {
  const std::size_t k = updates.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = k; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  ShuffledRound out;
  out.packets.reserve(k);
  for (std::size_t slot = 0; slot < k; ++slot) {
    ClientUpdate& u = updates[order[slot]];
    out.permutation.push_back(u.client_id);
    out.packets.push_back(UpdatePacket{std::move(u.payload), round, slot});
  }
  return out;
}

GlobalModel aggregate(const GlobalModel& global,
                      std::span<const UpdatePacket> packets, double server_lr) {
  if (packets.empty()) throw UsageError("aggregate: no packets");
  std::vector<Vector> flat;
  flat.reserve(packets.size());
  for (const UpdatePacket& p : packets) {
    if (!global.params.congruent(p.payload)) {
      throw UsageError("aggregate: packet in slot " + std::to_string(p.slot) +
                       " does not match the model shape");
    }
    flat.push_back(p.payload.flatten());
  }
  std::vector<std::size_t> order(packets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return content_less(flat[a], flat[b]);
  });

  Gradients mean = ParameterSet::zeros(global.config);
  for (std::size_t i : order) mean.add_scaled(packets[i].payload, 1.0);
  mean.scale(1.0 / static_cast<double>(packets.size()));

  GlobalModel next = global;
  next.params.add_scaled(mean, -server_lr);
  return next;
}

SimulationResult run_simulation(const FedConfig& fed, const ModelConfig& model_cfg,
                                const Corpus& corpus,
                                const std::optional<DpConfig>& dp,
                                const SimulationOptions& options) {
  fed.validate();
  if (corpus.shards.size() != fed.clients) {
    throw ConfigError("fed.clients is " + std::to_string(fed.clients) +
                      " but the corpus has " + std::to_string(corpus.shards.size()) +
                      " client shards");
  }
  ModelConfig mc = model_cfg;
  if (mc.vocab_size == 0) mc.vocab_size = corpus.vocab.size();
  if (mc.vocab_size != corpus.vocab.size()) {
    throw ConfigError("model.vocab_size does not match the corpus vocabulary");
  }
  mc.validate();
  if (dp) dp->validate();

  TraceHeader header;
  header.clients = fed.clients;
  header.rounds = fed.rounds;
  header.seed = fed.seed;
  for (const std::string& name : options.record.layer_names(mc.n_blocks)) {
    const std::size_t b = static_cast<std::size_t>(std::stoul(name.substr(5)));
    const bool fc = name.ends_with(".fc");
    header.layer_manifest.push_back(
        LayerSpec{name, fc ? mc.hidden() : mc.embed_dim,
                  fc ? mc.block_input(b) : mc.hidden()});
  }
  if (dp) {
    DpSummary s;
    s.config = *dp;
    std::size_t min_windows = 0;
    std::size_t max_batches = 0;
    for (const auto& shard : corpus.shards) {
      const std::size_t w = windows_of(shard.train, mc.context).size();
      min_windows = min_windows == 0 ? w : std::min(min_windows, w);
      max_batches = std::max(max_batches, (w + fed.batch_size - 1) / fed.batch_size);
    }
    s.sample_rate =
        min_windows == 0
            ? 1.0
            : std::min(1.0, double(fed.batch_size) / double(min_windows));
    s.steps = fed.rounds * fed.local_epochs * max_batches;
    s.epsilon = rdp_epsilon(dp->sigma, s.sample_rate, s.steps, dp->delta);
    header.dp = s;
  }

  SimulationResult result;
  result.trace = TraceStore(header);
  GlobalModel model = init_model(mc, fed.seed);

  std::vector<Sentence> pooled;
  for (const auto& shard : corpus.shards) {
    pooled.insert(pooled.end(), shard.valid.begin(), shard.valid.end());
  }
  Batch eval_set = windows_of(pooled, mc.context);
  if (eval_set.empty()) {
    pooled.clear();
    for (const auto& shard : corpus.shards) {
      pooled.insert(pooled.end(), shard.train.begin(), shard.train.end());
    }
    eval_set = windows_of(pooled, mc.context);
  }

  // A model this far beyond uniform guessing (loss ln V) is treated as lost.
  const double divergence_bound =
      kDivergenceLossFactor * std::log(static_cast<double>(mc.vocab_size));
  const DpConfig* dp_ptr = dp ? &*dp : nullptr;
  for (std::size_t t = 0; t < fed.rounds; ++t) {
    const GlobalModel snapshot = model;
    std::vector<ClientUpdate> updates(fed.clients);
    parallel_for(fed.clients, options.threads, [&](std::size_t k) {
      const ClientShard& shard = corpus.shards[k];
      updates[k].client_id = static_cast<int>(k);
      updates[k].payload = client_round(
          snapshot, shard, fed, dp_ptr,
          client_streams(fed.seed, static_cast<int>(k), t));
    });

    for (const ClientUpdate& u : updates) {
      if (!u.payload.all_finite()) {
        throw DivergedError("training diverged in round " + std::to_string(t) +
                            ": client " + std::to_string(u.client_id) +
                            " produced a non-finite update");
      }
    }

    ShuffledRound shuffled;
    if (fed.shuffle) {
      Rng rng = Rng::stream(fed.seed, "shuffle", t);
      shuffled = shuffle_round(std::move(updates), t, rng);
    } else {
      for (std::size_t k = 0; k < fed.clients; ++k) {
        shuffled.permutation.push_back(updates[k].client_id);
        shuffled.packets.push_back(UpdatePacket{std::move(updates[k].payload), t, k});
      }
    }
    for (const UpdatePacket& p : shuffled.packets) result.trace.record(p);
    result.truth.rounds.push_back(std::move(shuffled.permutation));

    model = aggregate(model, shuffled.packets, fed.server_lr);
    const double loss = eval_set.empty() ? 0.0 : eval_loss(model, eval_set);
    if (!std::isfinite(loss) || loss > divergence_bound) {
      std::ostringstream msg;
      msg << "training diverged in round " << t << ": evaluation loss is " << loss
          << " (bound " << divergence_bound << ")";
      throw DivergedError(msg.str());
    }
    result.loss_curve.push_back(loss);
  }

  result.trace.mutable_header().loss_curve = result.loss_curve;
  result.final_model = std::move(model);
  return result;
}

}  // namespace fedprint
