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

#include "fedprint/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedprint/errors.h"
#include "fedprint/rng.h"

namespace fedprint {
namespace {

// Dense contingency table n[k][j] of predicted cluster k vs true class j.
struct Contingency {
  std::size_t clusters = 0;
  std::size_t classes = 0;
  std::vector<std::size_t> cells;
  std::vector<std::size_t> cluster_sizes;
  std::vector<std::size_t> class_sizes;

  std::size_t at(std::size_t k, std::size_t j) const { return cells[k * classes + j]; }
};

Contingency contingency(const LabeledPartition& p) {
  if (p.predicted.size() != p.truth.size()) {
    throw UsageError("metrics: predicted and true label counts differ (" +
                     std::to_string(p.predicted.size()) + " vs " +
                     std::to_string(p.truth.size()) + ")");
  }
  Contingency c;
  for (std::size_t i = 0; i < p.predicted.size(); ++i) {
    if (p.predicted[i] < 0 || p.truth[i] < 0) {
      throw UsageError("metrics: labels must be non-negative");
    }
    c.clusters = std::max(c.clusters, static_cast<std::size_t>(p.predicted[i]) + 1);
    c.classes = std::max(c.classes, static_cast<std::size_t>(p.truth[i]) + 1);
  }
  c.cells.assign(c.clusters * c.classes, 0);
  c.cluster_sizes.assign(c.clusters, 0);
  c.class_sizes.assign(c.classes, 0);
  for (std::size_t i = 0; i < p.predicted.size(); ++i) {
    const auto k = static_cast<std::size_t>(p.predicted[i]);
    const auto j = static_cast<std::size_t>(p.truth[i]);
    ++c.cells[k * c.classes + j];
    ++c.cluster_sizes[k];
    ++c.class_sizes[j];
  }
  return c;
}

std::uint64_t pairs(std::uint64_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

}  // namespace

double purity(const LabeledPartition& p) {
  if (p.predicted.empty()) throw UsageError("purity: need at least one item");
  const Contingency c = contingency(p);
  std::size_t dominant = 0;
  for (std::size_t k = 0; k < c.clusters; ++k) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < c.classes; ++j) best = std::max(best, c.at(k, j));
    dominant += best;
  }
  return static_cast<double>(dominant) / static_cast<double>(p.predicted.size());
}

double rand_index(const LabeledPartition& p) {
  if (p.predicted.size() < 2) throw UsageError("rand_index: need at least two items");
  const Contingency c = contingency(p);
  std::uint64_t together_both = 0, together_pred = 0, together_true = 0;
  for (std::size_t v : c.cells) together_both += pairs(v);
  for (std::size_t v : c.cluster_sizes) together_pred += pairs(v);
  for (std::size_t v : c.class_sizes) together_true += pairs(v);
  const std::uint64_t total = pairs(p.predicted.size());
  // Disagreements: together in exactly one of the two partitions.
  const std::uint64_t disagree = together_pred + together_true - 2 * together_both;
  return static_cast<double>(total - disagree) / static_cast<double>(total);
}

double mutual_information(const LabeledPartition& p) {
  if (p.predicted.empty()) {
    throw UsageError("mutual_information: need at least one item");
  }
  const Contingency c = contingency(p);
  const double n = static_cast<double>(p.predicted.size());
  double mi = 0.0;
  for (std::size_t k = 0; k < c.clusters; ++k) {
    for (std::size_t j = 0; j < c.classes; ++j) {
      const std::size_t nkj = c.at(k, j);
      if (nkj == 0) continue;
      const double joint = static_cast<double>(nkj);
      mi += (joint / n) * std::log(n * joint / (static_cast<double>(c.cluster_sizes[k]) *
                                                static_cast<double>(c.class_sizes[j])));
    }
  }
  return std::max(0.0, mi);
}

MetricScores score(const LabeledPartition& p) {
  return MetricScores{purity(p), rand_index(p), mutual_information(p)};
}

MetricScores random_baseline(const std::vector<int>& truth, std::size_t k,
                             std::size_t trials, std::uint64_t seed) {
  if (k < 1 || trials < 1) throw UsageError("random_baseline: need k >= 1, trials >= 1");
  Rng rng = Rng::stream(seed, "random-baseline");
  MetricScores mean;
  LabeledPartition p{std::vector<int>(truth.size()), truth};
  for (std::size_t t = 0; t < trials; ++t) {
    for (int& label : p.predicted) label = static_cast<int>(rng.uniform_index(k));
    const MetricScores s = score(p);
    mean.purity += s.purity;
    mean.rand_index += s.rand_index;
    mean.mutual_information += s.mutual_information;
  }
  const double inv = 1.0 / static_cast<double>(trials);
  mean.purity *= inv;
  mean.rand_index *= inv;
  mean.mutual_information *= inv;
  return mean;
}

}  // namespace fedprint
