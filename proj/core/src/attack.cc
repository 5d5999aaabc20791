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

#include "fedprint/attack.h"

#include <algorithm>
#include <iostream>
#include <string>

#include "fedprint/errors.h"

namespace fedprint {
namespace {

std::size_t manifest_blocks(const TraceHeader& header) {
  std::size_t n = 0;
  for (const LayerSpec& spec : header.layer_manifest) {
    if (spec.name.rfind("block", 0) != 0) continue;
    const auto dot = spec.name.find('.');
    n = std::max<std::size_t>(n, std::stoul(spec.name.substr(5, dot - 5)));
  }
  return n;
}

}  // namespace

FeatureMatrix build_features(const TraceStore& trace, const LayerSelector& selector) {
  trace.validate_complete();
  std::vector<std::size_t> layers;
  std::size_t dim = 0;
  for (const std::string& name :
       selector.layer_names(manifest_blocks(trace.header()))) {
    const std::size_t idx = trace.layer_index(name);
    layers.push_back(idx);
    const LayerSpec& spec = trace.header().layer_manifest[idx];
    dim += spec.rows * spec.cols;
  }

  FeatureMatrix f;
  f.rounds = trace.rounds();
  f.clients = trace.clients();
  f.values = Matrix(trace.records().size(), dim);
  for (std::size_t r = 0; r < trace.records().size(); ++r) {
    const TraceRecord& rec = trace.records()[r];
    auto out = f.values.row(r);
    std::size_t offset = 0;
    for (std::size_t idx : layers) {
      const Vector& v = rec.layers[idx];
      std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
      offset += v.size();
    }
    try {
      const Vector unit = normalize(out);
      std::copy(unit.begin(), unit.end(), out.begin());
    } catch (const DegenerateInputError&) {
      std::fill(out.begin(), out.end(), 0.0);
      out[0] = 1.0;
      f.degenerate_rows.push_back(r);
      std::clog << "warning: record (round " << rec.round << ", slot " << rec.slot
                << ") has an all-zero gradient; using e1 as its feature\n";
    }
  }
  return f;
}

ClusterAssignment greedy_match(const FeatureMatrix& features) {
  const std::size_t k = features.clients;
  const std::size_t t_count = features.rounds;
  if (k == 0 || features.values.rows() != k * t_count) {
    throw UsageError(
        "greedy_match: every round must contribute exactly K records (client "
        "subsampling is not supported)");
  }
  ClusterAssignment out;
  out.rounds = t_count;
  out.clients = k;
  out.labels.assign(k * t_count, -1);
  for (std::size_t s = 0; s < k; ++s) out.labels[s] = static_cast<int>(s);

  Matrix cost(k, k);
  for (std::size_t t = 0; t + 1 < t_count; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        cost(i, j) = 1.0 - cosine_similarity(features.row(t, i), features.row(t + 1, j));
      }
    }
    const LsapSolution match = solve_lsap(cost);
    for (std::size_t i = 0; i < k; ++i) {
      out.labels[(t + 1) * k + match.assignment[i]] = out.labels[t * k + i];
    }
  }
  return out;
}

AttackMethod parse_attack_method(std::string_view name) {
  if (name == "kmeans") return AttackMethod::kKMeans;
  if (name == "spectral") return AttackMethod::kSpectral;
  if (name == "greedy") return AttackMethod::kGreedy;
  throw UsageError("unknown attack method '" + std::string(name) +
                   "' (expected kmeans, spectral or greedy)");
}

std::string to_string(AttackMethod method) {
  switch (method) {
    case AttackMethod::kKMeans: return "kmeans";
    case AttackMethod::kSpectral: return "spectral";
    case AttackMethod::kGreedy: return "greedy";
  }
  return "unknown";
}

ClusterAssignment run_attack(const FeatureMatrix& features, AttackMethod method,
                             std::uint64_t seed) {
  switch (method) {
    case AttackMethod::kGreedy:
      return greedy_match(features);
    case AttackMethod::kKMeans:
    case AttackMethod::kSpectral: {
      ClusterAssignment out;
      out.rounds = features.rounds;
      out.clients = features.clients;
      out.labels = method == AttackMethod::kKMeans
                       ? kmeans(features.values, features.clients, seed).labels
                       : spectral(features.values, features.clients, seed);
      return out;
    }
  }
  throw UsageError("run_attack: unsupported method");
}

}  // namespace fedprint
