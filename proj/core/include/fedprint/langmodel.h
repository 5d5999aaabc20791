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

#ifndef FEDPRINT_LANGMODEL_H_
#define FEDPRINT_LANGMODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedprint/numerics.h"

namespace fedprint {

using TokenId = std::int32_t;

// Shape of the next-token model. The model is
//   embedding -> concat(context) -> block1 (FC, ReLU, Proj)
//             -> blocks 2..n (FC, ReLU, Proj, residual add) -> output softmax.
// Linear weights are stored (out x in), so dL/dW = dL/db * x^T row by row.
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 32;
  std::size_t context = 4;
  std::size_t n_blocks = 4;
  std::size_t ffn_mult = 4;

  std::size_t hidden() const { return ffn_mult * embed_dim; }
  // Input width of block i (1-based).
  std::size_t block_input(std::size_t i) const {
    return i == 1 ? context * embed_dim : embed_dim;
  }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct FfnBlock {
  Matrix fc_weight;    // hidden x block_input
  Vector fc_bias;      // hidden
  Matrix proj_weight;  // embed_dim x hidden
  Vector proj_bias;    // embed_dim

  friend bool operator==(const FfnBlock&, const FfnBlock&) = default;
};

// Every trainable tensor of the model. Gradients and client updates share
// this layout.
struct ParameterSet {
  Matrix embedding;      // vocab x embed_dim
  std::vector<FfnBlock> blocks;
  Matrix output_weight;  // vocab x embed_dim
  Vector output_bias;    // vocab

  static ParameterSet zeros(const ModelConfig& config);

  // Visits every tensor as (stable name, flat values) in a fixed order.
  template <typename F>
  void for_each(F&& f) {
    f(std::string("embedding"), embedding.flat());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "block" + std::to_string(i + 1);
      f(p + ".fc.weight", blocks[i].fc_weight.flat());
      f(p + ".fc.bias", std::span<double>(blocks[i].fc_bias));
      f(p + ".proj.weight", blocks[i].proj_weight.flat());
      f(p + ".proj.bias", std::span<double>(blocks[i].proj_bias));
    }
    f(std::string("output.weight"), output_weight.flat());
    f(std::string("output.bias"), std::span<double>(output_bias));
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<ParameterSet*>(this)->for_each(
        [&](const std::string& name, std::span<double> values) {
          f(name, std::span<const double>(values));
        });
  }

  std::size_t parameter_count() const;
  bool congruent(const ParameterSet& other) const;
  void set_zero();
  // this += alpha * other
  void add_scaled(const ParameterSet& other, double alpha);
  void scale(double alpha);
  double squared_norm() const;
  bool all_finite() const;
  // All values concatenated in for_each order.
  Vector flatten() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

using Gradients = ParameterSet;

struct GlobalModel {
  ModelConfig config;
  ParameterSet params;

  friend bool operator==(const GlobalModel&, const GlobalModel&) = default;
};

// Fixed-width token windows with next-token targets, stored contiguously.
class Batch {
 public:
  Batch() = default;
  explicit Batch(std::size_t context) : context_(context) {}

  void add(std::span<const TokenId> window, TokenId target);
  void append(const Batch& other);

  std::size_t size() const { return targets_.size(); }
  bool empty() const { return targets_.empty(); }
  std::size_t context() const { return context_; }
  std::span<const TokenId> window(std::size_t i) const {
    return {tokens_.data() + i * context_, context_};
  }
  TokenId target(std::size_t i) const { return targets_[i]; }

  friend bool operator==(const Batch&, const Batch&) = default;

 private:
  std::size_t context_ = 0;
  std::vector<TokenId> tokens_;
  std::vector<TokenId> targets_;
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero. The embedding
// table uses fan_in = embed_dim.
GlobalModel init_model(const ModelConfig& config, std::uint64_t seed);

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
};

// Mean softmax cross-entropy (natural log) over the batch and its exact
// gradient.
LossAndGrads loss_and_grads(const GlobalModel& model, const Batch& batch);

// Reusable scratch for single-sample backprop; avoids reallocating
// activations in the training loop.
class Backprop {
 public:
  explicit Backprop(const ModelConfig& config);

  // Adds scale * dL/dtheta for one sample to `grads` and returns its loss.
  double accumulate(const GlobalModel& model, std::span<const TokenId> window,
                    TokenId target, double scale, Gradients& grads);

  // Loss of one sample without touching any gradient.
  double loss(const GlobalModel& model, std::span<const TokenId> window,
              TokenId target);

  // Softmax over the vocabulary for one window.
  const Vector& probabilities(const GlobalModel& model,
                              std::span<const TokenId> window);

 private:
  void forward(const GlobalModel& model, std::span<const TokenId> window);

  std::vector<Vector> inputs_;  // inputs_[i] is the input of block i
  std::vector<Vector> pre_;     // FC pre-activations
  std::vector<Vector> hidden_;  // ReLU outputs
  Vector top_;                  // output of the last block
  Vector logits_;
  Vector probs_;
  double log_normalizer_ = 0.0;
  Vector d_top_;
  Vector d_hidden_;
  Vector d_input_;
};

// Per-sample gradients, one ParameterSet per window of the batch.
std::vector<Gradients> per_sample_grads(const GlobalModel& model,
                                        const Batch& batch);

// p <- p - lr * g for every parameter. No momentum, no weight decay.
GlobalModel sgd_step(const GlobalModel& model, const Gradients& grads, double lr);
void sgd_step_in_place(GlobalModel& model, const Gradients& grads, double lr);

// Mean cross-entropy over all windows. Throws UsageError on an empty batch.
double eval_loss(const GlobalModel& model, const Batch& dataset);

enum class Sublayer { kFc, kProj, kBoth };

// Which linear layers feed the fingerprint features. Text form is
// "<blocks>:<kind>", blocks being "all" or a comma list of 1-based indices,
// kind one of fc, proj, both. A bare kind means all blocks.
struct LayerSelector {
  std::vector<std::size_t> blocks;  // empty == all blocks
  Sublayer sublayer = Sublayer::kBoth;

  static LayerSelector parse(std::string_view text);
  std::string to_string() const;

  // Names such as "block1.fc", ordered blocks ascending, FC before Proj.
  // Throws UsageError when a block index is outside [1, n_blocks].
  std::vector<std::string> layer_names(std::size_t n_blocks) const;

  friend bool operator==(const LayerSelector&, const LayerSelector&) = default;
};

// The weight matrix of a named linear layer ("block2.proj").
const Matrix& linear_weight(const ParameterSet& params, std::string_view name);

// Selected FFN weight gradients flattened row-major into one vector.
Vector extract_linear_grads(const Gradients& grads,
                            const LayerSelector& selector);

}  // namespace fedprint

#endif  // FEDPRINT_LANGMODEL_H_
