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

#include "fedprint/langmodel.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "fedprint/errors.h"
#include "fedprint/rng.h"

namespace fedprint {
namespace {

void fill_uniform(std::span<double> values, double bound, Rng& rng) {
  for (double& x : values) x = rng.uniform(-bound, bound);
}

void check_sample(const ModelConfig& config, std::span<const TokenId> window,
                  TokenId target) {
  if (window.size() != config.context) {
    throw UsageError("window has " + std::to_string(window.size()) +
                     " tokens, model context is " +
                     std::to_string(config.context));
  }
  auto in_range = [&](TokenId t) {
    return t >= 0 && static_cast<std::size_t>(t) < config.vocab_size;
  };
  for (TokenId t : window) {
    if (!in_range(t)) {
      throw UsageError("token id " + std::to_string(t) +
                       " outside vocabulary of size " +
                       std::to_string(config.vocab_size));
    }
  }
  if (!in_range(target)) {
    throw UsageError("target id " + std::to_string(target) +
                     " outside vocabulary of size " +
                     std::to_string(config.vocab_size));
  }
}

// y = W x + b
void affine(const Matrix& w, const Vector& b, std::span<const double> x,
            Vector& y) {
  y.resize(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto row = w.row(r);
    double s = b[r];
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

// dW += dy x^T, db += dy, and (optionally) dx = W^T dy.
void affine_backward(const Matrix& w, std::span<const double> x,
                     std::span<const double> dy, Matrix& dw, Vector& db,
                     Vector* dx) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double g = dy[r];
    db[r] += g;
    if (g == 0.0) continue;
    auto drow = dw.row(r);
    for (std::size_t c = 0; c < drow.size(); ++c) drow[c] += g * x[c];
  }
  if (dx != nullptr) {
    dx->assign(w.cols(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const double g = dy[r];
      if (g == 0.0) continue;
      auto row = w.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) (*dx)[c] += g * row[c];
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 1 || embed_dim < 1 || context < 1 || n_blocks < 1 ||
      ffn_mult < 1) {
    throw ConfigError(
        "model: vocab_size, embed_dim, context, n_blocks and ffn_mult "
        "must all be >= 1");
  }
}

ParameterSet ParameterSet::zeros(const ModelConfig& config) {
  config.validate();
  ParameterSet p;
  p.embedding = Matrix(config.vocab_size, config.embed_dim);
  for (std::size_t i = 1; i <= config.n_blocks; ++i) {
    FfnBlock b;
    b.fc_weight = Matrix(config.hidden(), config.block_input(i));
    b.fc_bias.assign(config.hidden(), 0.0);
    b.proj_weight = Matrix(config.embed_dim, config.hidden());
    b.proj_bias.assign(config.embed_dim, 0.0);
    p.blocks.push_back(std::move(b));
  }
  p.output_weight = Matrix(config.vocab_size, config.embed_dim);
  p.output_bias.assign(config.vocab_size, 0.0);
  return p;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, std::span<const double> v) { n += v.size(); });
  return n;
}

bool ParameterSet::congruent(const ParameterSet& other) const {
  if (blocks.size() != other.blocks.size()) return false;
  std::vector<std::size_t> mine, theirs;
  for_each([&](const std::string&, std::span<const double> v) {
    mine.push_back(v.size());
  });
  other.for_each([&](const std::string&, std::span<const double> v) {
    theirs.push_back(v.size());
  });
  return mine == theirs && embedding.same_shape(other.embedding) &&
         output_weight.same_shape(other.output_weight);
}

void ParameterSet::set_zero() {
  for_each([](const std::string&, std::span<double> v) {
    std::fill(v.begin(), v.end(), 0.0);
  });
}

void ParameterSet::add_scaled(const ParameterSet& other, double alpha) {
  if (!congruent(other)) throw UsageError("add_scaled: shape mismatch");
  std::vector<std::span<const double>> src;
  other.for_each([&](const std::string&, std::span<const double> v) {
    src.push_back(v);
  });
  std::size_t k = 0;
  for_each([&](const std::string&, std::span<double> v) {
    auto s = src[k++];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += alpha * s[i];
  });
}

void ParameterSet::scale(double alpha) {
  for_each([&](const std::string&, std::span<double> v) {
    for (double& x : v) x *= alpha;
  });
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for_each([&](const std::string&, std::span<const double> v) {
    for (double x : v) s += x * x;
  });
  return s;
}

bool ParameterSet::all_finite() const {
  bool ok = true;
  for_each([&](const std::string&, std::span<const double> v) {
    for (double x : v) ok = ok && std::isfinite(x);
  });
  return ok;
}

Vector ParameterSet::flatten() const {
  Vector out;
  out.reserve(parameter_count());
  for_each([&](const std::string&, std::span<const double> v) {
    out.insert(out.end(), v.begin(), v.end());
  });
  return out;
}

void Batch::add(std::span<const TokenId> window, TokenId target) {
  if (window.size() != context_) {
    throw UsageError("Batch::add: window width " + std::to_string(window.size()) +
                     " != context " + std::to_string(context_));
  }
  tokens_.insert(tokens_.end(), window.begin(), window.end());
  targets_.push_back(target);
}

void Batch::append(const Batch& other) {
  if (other.context_ != context_) throw UsageError("Batch::append: context mismatch");
  tokens_.insert(tokens_.end(), other.tokens_.begin(), other.tokens_.end());
  targets_.insert(targets_.end(), other.targets_.begin(), other.targets_.end());
}

GlobalModel init_model(const ModelConfig& config, std::uint64_t seed) {
  GlobalModel model{config, ParameterSet::zeros(config)};
  Rng rng = Rng::stream(seed, "init");
  ParameterSet& p = model.params;
  fill_uniform(p.embedding.flat(), 1.0 / std::sqrt(double(config.embed_dim)), rng);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    fill_uniform(p.blocks[i].fc_weight.flat(),
                 1.0 / std::sqrt(double(config.block_input(i + 1))), rng);
    fill_uniform(p.blocks[i].proj_weight.flat(),
                 1.0 / std::sqrt(double(config.hidden())), rng);
  }
  fill_uniform(p.output_weight.flat(), 1.0 / std::sqrt(double(config.embed_dim)),
               rng);
  return model;
}

Backprop::Backprop(const ModelConfig& config)
    : inputs_(config.n_blocks), pre_(config.n_blocks), hidden_(config.n_blocks) {}

void Backprop::forward(const GlobalModel& model, std::span<const TokenId> window) {
  const ModelConfig& cfg = model.config;
  const ParameterSet& p = model.params;

  Vector& x0 = inputs_[0];
  x0.resize(cfg.context * cfg.embed_dim);
  for (std::size_t j = 0; j < cfg.context; ++j) {
    auto e = p.embedding.row(static_cast<std::size_t>(window[j]));
    std::copy(e.begin(), e.end(), x0.begin() + j * cfg.embed_dim);
  }

  Vector y;
  for (std::size_t i = 0; i < cfg.n_blocks; ++i) {
    const FfnBlock& b = p.blocks[i];
    affine(b.fc_weight, b.fc_bias, inputs_[i], pre_[i]);
    hidden_[i].resize(pre_[i].size());
    for (std::size_t r = 0; r < pre_[i].size(); ++r) {
      hidden_[i][r] = pre_[i][r] > 0.0 ? pre_[i][r] : 0.0;
    }
    affine(b.proj_weight, b.proj_bias, hidden_[i], y);
    if (i > 0) {
      for (std::size_t r = 0; r < y.size(); ++r) y[r] += inputs_[i][r];
    }
    if (i + 1 < cfg.n_blocks) {
      inputs_[i + 1] = y;
    } else {
      top_ = y;
    }
  }

  affine(p.output_weight, p.output_bias, top_, logits_);
  const double m = *std::max_element(logits_.begin(), logits_.end());
  probs_.resize(logits_.size());
  double z = 0.0;
  for (std::size_t v = 0; v < logits_.size(); ++v) {
    probs_[v] = std::exp(logits_[v] - m);
    z += probs_[v];
  }
  for (double& v : probs_) v /= z;
  log_normalizer_ = m + std::log(z);
}

double Backprop::loss(const GlobalModel& model, std::span<const TokenId> window,
                      TokenId target) {
  check_sample(model.config, window, target);
  forward(model, window);
  return log_normalizer_ - logits_[static_cast<std::size_t>(target)];
}

const Vector& Backprop::probabilities(const GlobalModel& model,
                                      std::span<const TokenId> window) {
  if (window.empty()) throw UsageError("probabilities: empty window");
  check_sample(model.config, window, window[0]);
  forward(model, window);
  return probs_;
}

double Backprop::accumulate(const GlobalModel& model,
                            std::span<const TokenId> window, TokenId target,
                            double scale, Gradients& grads) {
  const double sample_loss = loss(model, window, target);
  const ModelConfig& cfg = model.config;
  const ParameterSet& p = model.params;

  // dL/dlogits = softmax - onehot(target)
  Vector d_logits(probs_);
  d_logits[static_cast<std::size_t>(target)] -= 1.0;
  for (double& g : d_logits) g *= scale;

  affine_backward(p.output_weight, top_, d_logits, grads.output_weight,
                  grads.output_bias, &d_top_);

  for (std::size_t i = cfg.n_blocks; i-- > 0;) {
    const FfnBlock& b = p.blocks[i];
    FfnBlock& gb = grads.blocks[i];
    affine_backward(b.proj_weight, hidden_[i], d_top_, gb.proj_weight,
                    gb.proj_bias, &d_hidden_);
    for (std::size_t r = 0; r < d_hidden_.size(); ++r) {
      if (!(pre_[i][r] > 0.0)) d_hidden_[r] = 0.0;
    }
    affine_backward(b.fc_weight, inputs_[i], d_hidden_, gb.fc_weight,
                    gb.fc_bias, &d_input_);
    if (i > 0) {
      // Residual path.
      for (std::size_t r = 0; r < d_input_.size(); ++r) d_input_[r] += d_top_[r];
    }
    d_top_.swap(d_input_);
  }

  for (std::size_t j = 0; j < cfg.context; ++j) {
    auto row = grads.embedding.row(static_cast<std::size_t>(window[j]));
    for (std::size_t c = 0; c < cfg.embed_dim; ++c) {
      row[c] += d_top_[j * cfg.embed_dim + c];
    }
  }
  return sample_loss;
}

LossAndGrads loss_and_grads(const GlobalModel& model, const Batch& batch) {
  if (batch.empty()) throw UsageError("loss_and_grads: empty batch");
  LossAndGrads out{0.0, ParameterSet::zeros(model.config)};
  Backprop bp(model.config);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.loss += bp.accumulate(model, batch.window(i), batch.target(i), scale,
                              out.grads);
  }
  out.loss *= scale;
  return out;
}

std::vector<Gradients> per_sample_grads(const GlobalModel& model,
                                        const Batch& batch) {
  std::vector<Gradients> out;
  out.reserve(batch.size());
  Backprop bp(model.config);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Gradients g = ParameterSet::zeros(model.config);
    bp.accumulate(model, batch.window(i), batch.target(i), 1.0, g);
    out.push_back(std::move(g));
  }
  return out;
}

void sgd_step_in_place(GlobalModel& model, const Gradients& grads, double lr) {
  if (!model.params.congruent(grads)) throw UsageError("sgd_step: shape mismatch");
  if (lr == 0.0) return;
  model.params.add_scaled(grads, -lr);
}

GlobalModel sgd_step(const GlobalModel& model, const Gradients& grads, double lr) {
  GlobalModel next = model;
  sgd_step_in_place(next, grads, lr);
  return next;
}

double eval_loss(const GlobalModel& model, const Batch& dataset) {
  if (dataset.empty()) throw UsageError("eval_loss: empty dataset");
  Backprop bp(model.config);
  double total = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    total += bp.loss(model, dataset.window(i), dataset.target(i));
  }
  return total / static_cast<double>(dataset.size());
}

LayerSelector LayerSelector::parse(std::string_view text) {
  LayerSelector sel;
  std::string_view blocks_part = "all";
  std::string_view kind_part = text;
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    blocks_part = text.substr(0, colon);
    kind_part = text.substr(colon + 1);
  }
  if (kind_part == "fc") {
    sel.sublayer = Sublayer::kFc;
  } else if (kind_part == "proj") {
    sel.sublayer = Sublayer::kProj;
  } else if (kind_part == "both") {
    sel.sublayer = Sublayer::kBoth;
  } else {
    throw UsageError("selector '" + std::string(text) +
                     "': layer kind must be fc, proj or both");
  }
  if (blocks_part != "all") {
    while (!blocks_part.empty()) {
      const auto comma = blocks_part.find(',');
      const std::string_view item = blocks_part.substr(0, comma);
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), index);
      if (ec != std::errc() || ptr != item.data() + item.size() || index == 0) {
        throw UsageError("selector '" + std::string(text) +
                         "': block indices are 1-based integers");
      }
      sel.blocks.push_back(index);
      if (comma == std::string_view::npos) break;
      blocks_part.remove_prefix(comma + 1);
    }
    if (sel.blocks.empty()) {
      throw UsageError("selector '" + std::string(text) + "': no blocks named");
    }
    std::sort(sel.blocks.begin(), sel.blocks.end());
    sel.blocks.erase(std::unique(sel.blocks.begin(), sel.blocks.end()),
                     sel.blocks.end());
  }
  return sel;
}

std::string LayerSelector::to_string() const {
  std::string out;
  if (blocks.empty()) {
    out = "all";
  } else {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(blocks[i]);
    }
  }
  switch (sublayer) {
    case Sublayer::kFc: return out + ":fc";
    case Sublayer::kProj: return out + ":proj";
    case Sublayer::kBoth: return out + ":both";
  }
  return out;
}

std::vector<std::string> LayerSelector::layer_names(std::size_t n_blocks) const {
  std::vector<std::size_t> chosen = blocks;
  if (chosen.empty()) {
    for (std::size_t i = 1; i <= n_blocks; ++i) chosen.push_back(i);
  }
  std::vector<std::string> names;
  for (std::size_t b : chosen) {
    if (b < 1 || b > n_blocks) {
      throw UsageError("selector names block " + std::to_string(b) +
                       " but the model has " + std::to_string(n_blocks));
    }
    const std::string prefix = "block" + std::to_string(b);
    if (sublayer != Sublayer::kProj) names.push_back(prefix + ".fc");
    if (sublayer != Sublayer::kFc) names.push_back(prefix + ".proj");
  }
  return names;
}

const Matrix& linear_weight(const ParameterSet& params, std::string_view name) {
  const auto dot = name.find('.');
  if (name.substr(0, 5) == "block" && dot != std::string_view::npos) {
    std::size_t index = 0;
    auto digits = name.substr(5, dot - 5);
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && index >= 1 &&
        index <= params.blocks.size()) {
      const auto kind = name.substr(dot + 1);
      if (kind == "fc") return params.blocks[index - 1].fc_weight;
      if (kind == "proj") return params.blocks[index - 1].proj_weight;
    }
  }
  throw UsageError("unknown linear layer '" + std::string(name) + "'");
}

Vector extract_linear_grads(const Gradients& grads,
                            const LayerSelector& selector) {
  Vector out;
  for (const std::string& name : selector.layer_names(grads.blocks.size())) {
    auto values = linear_weight(grads, name).flat();
    out.insert(out.end(), values.begin(), values.end());
  }
  return out;
}

}  // namespace fedprint
