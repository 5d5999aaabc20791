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
#include <vector>

#include "fedprint/attack.h"
#include "fedprint/errors.h"

namespace fedprint {

std::vector<int> spectral(const Matrix& points, std::size_t k, std::uint64_t seed) {
  const std::size_t n = points.rows();
  if (k < 1 || k > n) throw UsageError("spectral: need 1 <= k <= number of points");
  if (k == 1) return std::vector<int>(n, 0);

  Matrix dist(n, n);
  std::vector<double> pairwise;
  pairwise.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(points.row(i), points.row(j));
      dist(i, j) = dist(j, i) = d;
      pairwise.push_back(d);
    }
  }

  // Median heuristic for the kernel bandwidth.
  auto mid = pairwise.begin() + static_cast<std::ptrdiff_t>(pairwise.size() / 2);
  std::nth_element(pairwise.begin(), mid, pairwise.end());
  double gamma = *mid;
  if (gamma <= 0.0) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double d : pairwise) {
      if (d > 0.0) {
        sum += d;
        ++count;
      }
    }
    if (count == 0) return std::vector<int>(n, 0);
    gamma = sum / double(count);
  }

  Matrix affinity(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      affinity(i, j) = std::exp(-dist(i, j) * dist(i, j) / (2.0 * gamma * gamma));
    }
  }
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double a : affinity.row(i)) deg += a;
    inv_sqrt_degree[i] = 1.0 / std::sqrt(deg);  // deg >= 1 from the diagonal
  }
  Matrix laplacian(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      laplacian(i, j) = (i == j ? 1.0 : 0.0) -
                        inv_sqrt_degree[i] * affinity(i, j) * inv_sqrt_degree[j];
    }
  }

  const EigenDecomposition eig = symmetric_eigen(laplacian, k);
  Matrix embedding = eig.vectors;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = embedding.row(i);
    double norm = 0.0;
    for (double x : row) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& x : row) x /= norm;
    }
  }
  return kmeans(embedding, k, seed).labels;
}

}  // namespace fedprint
