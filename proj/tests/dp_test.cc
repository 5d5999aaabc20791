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

#include <cmath>

#include "fedprint/errors.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedprint {
namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.vocab_size = 5;
  c.embed_dim = 3;
  c.context = 2;
  c.n_blocks = 1;
  c.ffn_mult = 1;
  return c;
}

TEST(DpConfig, Validate) {
  EXPECT_NO_THROW(DpConfig{}.validate());
  EXPECT_THROW((DpConfig{0.0, 1.0, 1e-4}).validate(), ConfigError);
  EXPECT_THROW((DpConfig{1.0, -0.5, 1e-4}).validate(), ConfigError);
  EXPECT_THROW((DpConfig{1.0, 1.0, 0.0}).validate(), ConfigError);
  EXPECT_THROW((DpConfig{1.0, 1.0, 1.0}).validate(), ConfigError);
}

TEST(Clip, ScalesOnlyWhenAboveBound) {
  EXPECT_EQ(clip_gradient(Vector{3.0, 4.0}, 10.0), (Vector{3.0, 4.0}));
  const Vector c = clip_gradient(Vector{3.0, 4.0}, 1.0);
  EXPECT_NEAR(c[0], 0.6, 1e-15);
  EXPECT_NEAR(c[1], 0.8, 1e-15);
  EXPECT_THROW(clip_gradient(Vector{1.0}, 0.0), UsageError);
}

// Property: clipped norm <= C, direction kept, short vectors untouched.
TEST(Clip, RandomVectors) {
  Rng rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vector g = testing::random_vector(rng, 1 + rng.uniform_index(30),
                                            std::exp(rng.uniform(-5.0, 5.0)));
    const double clip = std::exp(rng.uniform(-3.0, 3.0));
    const Vector c = clip_gradient(g, clip);
    const double n = l2_norm(g);
    EXPECT_LE(l2_norm(c), clip * (1.0 + 1e-12));
    if (n <= clip) {
      EXPECT_EQ(c, g);
    } else {
      EXPECT_NEAR(cosine_similarity(c, g), 1.0, 1e-12);
    }
  }
}

TEST(Clip, GlobalNormAcrossTensors) {
  const ModelConfig cfg = tiny_config();
  Gradients g = ParameterSet::zeros(cfg);
  g.embedding(0, 0) = 3.0;
  g.output_bias[1] = 4.0;
  clip_in_place(g, 1.0);
  EXPECT_NEAR(g.embedding(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(g.output_bias[1], 0.8, 1e-15);
}

TEST(Accumulator, NoiselessMeanOfClipped) {
  const ModelConfig cfg = tiny_config();
  DpAccumulator acc(cfg, DpConfig{1.0, 0.0, 1e-4});
  Gradients a = ParameterSet::zeros(cfg), b = ParameterSet::zeros(cfg);
  a.output_bias[0] = 10.0;
  b.output_bias[0] = 0.5;
  acc.add(a);
  acc.add(b);
  EXPECT_EQ(acc.count(), 2u);
  Rng rng(1);
  const Gradients out = acc.release(rng);
  EXPECT_DOUBLE_EQ(out.output_bias[0], 0.75);
  EXPECT_EQ(out.output_bias[1], 0.0);
  acc.reset();
  EXPECT_EQ(acc.count(), 0u);
  EXPECT_THROW(acc.release(rng), UsageError);
}

// Per-coordinate noise of the released mean has std sigma * C / L.
TEST(Accumulator, NoiseStandardDeviation) {
  const ModelConfig cfg = tiny_config();
  const DpConfig dp{0.5, 1.3, 1e-4};
  const std::size_t lots = 4;
  DpAccumulator acc(cfg, dp);
  for (std::size_t i = 0; i < lots; ++i) {
    Gradients z = ParameterSet::zeros(cfg);
    acc.add(z);
  }
  Rng rng(7);
  double s = 0.0, s2 = 0.0;
  std::size_t n = 0;
  while (n < 100000) {
    for (double x : acc.release(rng).flatten()) {
      s += x;
      s2 += x * x;
      ++n;
    }
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  const double want = dp.sigma * dp.clip / lots;
  EXPECT_NEAR(mean, 0.0, 0.01 * want);
  EXPECT_NEAR(sd, want, 0.02 * want);
}

TEST(Privatize, MatchesAccumulator) {
  const ModelConfig cfg = tiny_config();
  std::vector<Gradients> samples(3, ParameterSet::zeros(cfg));
  samples[0].output_bias[2] = 2.0;
  samples[1].embedding(1, 1) = -0.1;
  const DpConfig dp{1.0, 0.7, 1e-4};
  Rng r1(5), r2(5);
  const Gradients p = privatize(samples, dp, r1);
  DpAccumulator acc(cfg, dp);
  for (auto g : samples) acc.add(g);
  EXPECT_EQ(acc.release(r2), p);
  EXPECT_EQ(samples[0].output_bias[2], 2.0);
  EXPECT_THROW(privatize(std::vector<Gradients>{}, dp, r1), UsageError);
}

// With q = 1 the mechanism is the plain Gaussian one, whose order-alpha RDP
// per step is alpha / (2 sigma^2).
TEST(RdpEpsilon, FullBatchClosedForm) {
  for (double sigma : {0.8, 1.5, 4.0}) {
    const std::size_t steps = 10;
    const double delta = 1e-5;
    double best = 1e300;
    for (int a = 2; a <= 256; ++a) {
      best = std::min(best, steps * a / (2.0 * sigma * sigma) +
                                std::log(1.0 / delta) / (a - 1));
    }
    EXPECT_NEAR(rdp_epsilon(sigma, 1.0, steps, delta), best, 1e-9 * best);
  }
}

TEST(RdpEpsilon, EdgeCasesAndOrdering) {
  EXPECT_EQ(rdp_epsilon(0.0, 0.1, 10, 1e-4), kInfiniteEpsilon);
  EXPECT_EQ(rdp_epsilon(1.0, 0.1, 0, 1e-4), 0.0);
  EXPECT_THROW(rdp_epsilon(1.0, 0.0, 10, 1e-4), UsageError);
  const double e05 = rdp_epsilon(0.5, 0.05, 200, 1e-4);
  const double e10 = rdp_epsilon(1.0, 0.05, 200, 1e-4);
  const double e15 = rdp_epsilon(1.5, 0.05, 200, 1e-4);
  EXPECT_GT(e05, e10);
  EXPECT_GT(e10, e15);
  EXPECT_LT(rdp_epsilon(1.0, 0.01, 200, 1e-4), e10);
  EXPECT_LT(rdp_epsilon(1.0, 0.05, 100, 1e-4), e10);
}

}  // namespace
}  // namespace fedprint
