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

#include "fedprint/dp.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fedprint/errors.h"

namespace fedprint {
namespace {

double log_add(double a, double b) {
  if (a == -kInfiniteEpsilon) return b;
  if (b == -kInfiniteEpsilon) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// RDP of one step of the sampled Gaussian mechanism at integer order alpha:
//   log( sum_k C(alpha,k) (1-q)^(alpha-k) q^k exp((k^2 - k) / (2 sigma^2)) )
//   / (alpha - 1)
double sampled_gaussian_rdp(double q, double sigma, int alpha) {
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  double log_a = -kInfiniteEpsilon;
  for (int k = 0; k <= alpha; ++k) {
    const double term = log_binomial(alpha, k) + (alpha - k) * std::log1p(-q) +
                        k * std::log(q) +
                        (double(k) * k - k) / (2.0 * sigma * sigma);
    log_a = log_add(log_a, term);
  }
  return log_a / (alpha - 1);
}

}  // namespace

void DpConfig::validate() const {
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw ConfigError("dp.clip: must be a positive finite number");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("dp.sigma: must be >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("dp.delta: must lie in (0, 1)");
  }
}

void clip_in_place(std::span<double> g, double clip) {
  if (!(clip > 0.0)) throw UsageError("clip_gradient: clip bound must be > 0");
  if (g.empty()) return;
  const double norm = l2_norm(g);
  const double factor = std::max(1.0, norm / clip);
  if (factor == 1.0) return;
  for (double& x : g) x /= factor;
}

Vector clip_gradient(std::span<const double> g, double clip) {
  Vector out(g.begin(), g.end());
  clip_in_place(std::span<double>(out), clip);
  return out;
}

void clip_in_place(Gradients& g, double clip) {
  if (!(clip > 0.0)) throw UsageError("clip_gradient: clip bound must be > 0");
  const double factor = std::max(1.0, std::sqrt(g.squared_norm()) / clip);
  if (factor == 1.0) return;
  g.for_each([&](const std::string&, std::span<double> v) {
    for (double& x : v) x /= factor;
  });
}

DpAccumulator::DpAccumulator(const ModelConfig& config, const DpConfig& dp)
    : dp_(dp), sum_(ParameterSet::zeros(config)) {
  dp_.validate();
}

DpAccumulator::DpAccumulator(const Gradients& shape, const DpConfig& dp)
    : dp_(dp), sum_(shape) {
  dp_.validate();
  sum_.set_zero();
}

void DpAccumulator::add(Gradients& sample) {
  clip_in_place(sample, dp_.clip);
  sum_.add_scaled(sample, 1.0);
  ++count_;
}

Gradients DpAccumulator::release(Rng& rng) const {
  if (count_ == 0) throw UsageError("DpAccumulator::release: no samples added");
  Gradients out = sum_;
  const double inv = 1.0 / static_cast<double>(count_);
  const double std_dev = dp_.sigma * dp_.clip;
  out.for_each([&](const std::string&, std::span<double> v) {
    if (std_dev > 0.0) {
      for (double& x : v) x = (x + std_dev * rng.normal()) * inv;
    } else {
      for (double& x : v) x *= inv;
    }
  });
  return out;
}

void DpAccumulator::reset() {
  sum_.set_zero();
  count_ = 0;
}

Gradients privatize(std::span<const Gradients> per_sample, const DpConfig& dp,
                    Rng& rng) {
  if (per_sample.empty()) throw UsageError("privatize: need at least one sample");
  DpAccumulator acc(per_sample[0], dp);
  for (const Gradients& g : per_sample) {
    if (!per_sample[0].congruent(g)) throw UsageError("privatize: shape mismatch");
    Gradients copy = g;
    acc.add(copy);
  }
  return acc.release(rng);
}

double rdp_epsilon(double sigma, double sample_rate, std::size_t steps,
                   double delta) {
  if (steps == 0) return 0.0;
  if (sigma == 0.0) return kInfiniteEpsilon;
  if (!(sigma > 0.0)) throw UsageError("rdp_epsilon: sigma must be >= 0");
  if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
    throw UsageError("rdp_epsilon: sample rate must lie in (0, 1]");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw UsageError("rdp_epsilon: delta must lie in (0, 1)");
  }
  double best = kInfiniteEpsilon;
  for (int alpha = 2; alpha <= 256; ++alpha) {
    const double rdp = steps * sampled_gaussian_rdp(sample_rate, sigma, alpha);
    const double eps = rdp + std::log(1.0 / delta) / (alpha - 1);
    best = std::min(best, eps);
  }
  return std::max(0.0, best);
}

}  // namespace fedprint
