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

#ifndef FEDPRINT_RNG_H_
#define FEDPRINT_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace fedprint {

// Derives an independent 64-bit seed for a labeled stream, so that e.g. the
// shuffler stream does not move when DP noise is switched on or off.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t a = 0, std::uint64_t b = 0);

// Deterministic random source. The engine is std::mt19937_64; all
// distributions are implemented here because the standard library leaves
// their algorithms unspecified, which would make traces platform-dependent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master, std::string_view label,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive_seed(master, label, a, b));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Standard normal via the Marsaglia polar method.
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fedprint

#endif  // FEDPRINT_RNG_H_
