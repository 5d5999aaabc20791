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

#ifndef FEDPRINT_METRICS_H_
#define FEDPRINT_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fedprint {

struct LabeledPartition {
  std::vector<int> predicted;
  std::vector<int> truth;
};

// Fraction of items that belong to the majority true class of their cluster.
double purity(const LabeledPartition& p);

// Fraction of item pairs on which both partitions agree (together in both or
// apart in both). Needs N >= 2.
double rand_index(const LabeledPartition& p);

// Raw mutual information in nats (not normalized, not adjusted).
double mutual_information(const LabeledPartition& p);

struct MetricScores {
  double purity = 0.0;
  double rand_index = 0.0;
  double mutual_information = 0.0;
};

MetricScores score(const LabeledPartition& p);

// Mean scores of `trials` assignments that draw each item's label uniformly
// from [0, k).
MetricScores random_baseline(const std::vector<int>& truth, std::size_t k,
                             std::size_t trials, std::uint64_t seed);

}  // namespace fedprint

#endif  // FEDPRINT_METRICS_H_
