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

#ifndef FEDPRINT_ATTACK_H_
#define FEDPRINT_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedprint/fedsim.h"
#include "fedprint/langmodel.h"
#include "fedprint/numerics.h"

namespace fedprint {

// One unit-norm row per trace record, ordered (round asc, slot asc).
struct FeatureMatrix {
  std::size_t rounds = 0;
  std::size_t clients = 0;
  Matrix values;
  // Records whose selected gradients were all zero; their row is e1.
  std::vector<std::size_t> degenerate_rows;

  std::span<const double> row(std::size_t round, std::size_t slot) const {
    return values.row(round * clients + slot);
  }
};

// Concatenates the selected layers of every record and normalizes the result.
// Only the trace is consulted; the truth sidecar is not an input.
FeatureMatrix build_features(const TraceStore& trace, const LayerSelector& selector);

// A group label in [0, K) for every record, ordered (round asc, slot asc).
struct ClusterAssignment {
  std::size_t rounds = 0;
  std::size_t clients = 0;
  std::vector<int> labels;

  int label(std::size_t round, std::size_t slot) const {
    return labels[round * clients + slot];
  }
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;  // Lloyd iterations of the winning restart
};

// Lloyd's algorithm with k-means++ seeding and Euclidean distance; the
// restart with the lowest inertia wins.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

// Gaussian affinity with median-distance bandwidth, symmetric normalized
// Laplacian, k smallest eigenvectors, row-normalized, then k-means.
std::vector<int> spectral(const Matrix& points, std::size_t k, std::uint64_t seed);

struct LsapSolution {
  std::vector<std::size_t> assignment;  // row -> column
  double cost = 0.0;
};

// Exact minimum-cost perfect matching on a square cost matrix (shortest
// augmenting paths with dual potentials, O(n^3)).
LsapSolution solve_lsap(const Matrix& cost);

// Chains optimal round-to-round alignments under the cosine distance
// 1 - cos(u, v). Labels are the round-0 slot each chain starts from.
ClusterAssignment greedy_match(const FeatureMatrix& features);

enum class AttackMethod { kKMeans, kSpectral, kGreedy };

AttackMethod parse_attack_method(std::string_view name);
std::string to_string(AttackMethod method);

ClusterAssignment run_attack(const FeatureMatrix& features, AttackMethod method,
                             std::uint64_t seed);

}  // namespace fedprint

#endif  // FEDPRINT_ATTACK_H_
