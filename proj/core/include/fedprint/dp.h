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

#ifndef FEDPRINT_DP_H_
#define FEDPRINT_DP_H_

#include <cstddef>
#include <limits>
#include <span>

#include "fedprint/langmodel.h"
#include "fedprint/numerics.h"
#include "fedprint/rng.h"

namespace fedprint {

struct DpConfig {
  double clip = 1.0;   // C
  double sigma = 0.0;  // noise multiplier
  double delta = 1e-4;

  void validate() const;

  friend bool operator==(const DpConfig&, const DpConfig&) = default;
};

// g / max(1, ||g|| / C). Vectors already inside the ball are returned as is.
Vector clip_gradient(std::span<const double> g, double clip);
void clip_in_place(std::span<double> g, double clip);
// Clips the whole parameter set by its global L2 norm.
void clip_in_place(Gradients& g, double clip);

// Sums clipped per-sample gradients and releases their noisy mean:
//   (1/L) * (sum_i clip(g_i, C) + N(0, sigma^2 C^2 I)),
// i.e. per-coordinate noise std sigma * C / L.
class DpAccumulator {
 public:
  DpAccumulator(const ModelConfig& config, const DpConfig& dp);
  // Takes tensor shapes from `shape`; its values are ignored.
  DpAccumulator(const Gradients& shape, const DpConfig& dp);

  // Clips `sample` in place, then adds it to the running sum.
  void add(Gradients& sample);
  std::size_t count() const { return count_; }

  // Noisy mean of everything added since the last reset.
  Gradients release(Rng& rng) const;
  void reset();

 private:
  DpConfig dp_;
  Gradients sum_;
  std::size_t count_ = 0;
};

Gradients privatize(std::span<const Gradients> per_sample, const DpConfig& dp,
                    Rng& rng);

inline constexpr double kInfiniteEpsilon = std::numeric_limits<double>::infinity();

// Upper bound on epsilon for `steps` compositions of the Poisson-subsampled
// Gaussian mechanism with noise multiplier sigma and sampling rate q, via
// Renyi DP at integer orders and the standard RDP -> (eps, delta)
// conversion. sigma == 0 yields kInfiniteEpsilon; steps == 0 yields 0.
double rdp_epsilon(double sigma, double sample_rate, std::size_t steps,
                   double delta);

}  // namespace fedprint

#endif  // FEDPRINT_DP_H_
