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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fedprint/attack.h"
#include "fedprint/errors.h"
#include "fedprint/rng.h"

namespace fedprint {
namespace {

struct Run {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;
};

// k-means++: first centre uniform, then proportional to squared distance to
// the nearest centre already chosen.
Matrix seed_centroids(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix c(k, x.cols());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.uniform_index(n);
  for (std::size_t m = 0; m < k; ++m) {
    std::copy(x.row(pick).begin(), x.row(pick).end(), c.row(m).begin());
    if (m + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_euclidean_distance(x.row(i), c.row(m)));
      total += nearest[i];
    }
    if (total <= 0.0) {
      pick = rng.uniform_index(n);
      continue;
    }
    double target = rng.uniform01() * total;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      target -= nearest[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
  }
  return c;
}

// Nearest centroid per point (ties to the lowest index); returns inertia.
double assign(const Matrix& x, const Matrix& c, std::vector<int>& labels,
              std::vector<double>& dist) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t m = 0; m < c.rows(); ++m) {
      const double d = squared_euclidean_distance(x.row(i), c.row(m));
      if (d < best) {
        best = d;
        arg = static_cast<int>(m);
      }
    }
    labels[i] = arg;
    dist[i] = best;
    inertia += best;
  }
  return inertia;
}

Run lloyd(const Matrix& x, std::size_t k, Rng& rng, int max_iterations) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Run run;
  run.centroids = seed_centroids(x, k, rng);
  run.labels.assign(n, -1);
  std::vector<int> next(n, 0);
  std::vector<double> dist(n, 0.0);
  double previous = std::numeric_limits<double>::infinity();

  for (int it = 0; it < max_iterations; ++it) {
    const double inertia = assign(x, run.centroids, next, dist);
    if (inertia > previous * (1.0 + 1e-12) + 1e-300) {
      throw NumericalError("kmeans: inertia increased from " +
                           std::to_string(previous) + " to " +
                           std::to_string(inertia));
    }
    previous = inertia;
    run.inertia = inertia;
    run.iterations = it + 1;
    if (next == run.labels) break;
    run.labels = next;

    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto m = static_cast<std::size_t>(run.labels[i]);
      ++counts[m];
      auto s = sums.row(m);
      auto p = x.row(i);
      for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
    }
    std::vector<char> taken(n, 0);
    for (std::size_t m = 0; m < k; ++m) {
      if (counts[m] > 0) {
        auto c = run.centroids.row(m);
        auto s = sums.row(m);
        for (std::size_t j = 0; j < d; ++j) c[j] = s[j] / double(counts[m]);
        continue;
      }
      // Empty cluster: reseed at the point farthest from its own centroid.
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      taken[far] = 1;
      dist[far] = 0.0;
      std::copy(x.row(far).begin(), x.row(far).end(), run.centroids.row(m).begin());
    }
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (k < 1 || k > points.rows()) {
    throw UsageError("kmeans: need 1 <= k <= number of points (k = " +
                     std::to_string(k) + ", n = " + std::to_string(points.rows()) +
                     ")");
  }
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Rng rng = Rng::stream(seed, "kmeans", static_cast<std::uint64_t>(r));
    Run run = lloyd(points, k, rng, std::max(1, options.max_iterations));
    if (run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.iterations = run.iterations;
    }
  }
  return best;
}

}  // namespace fedprint
