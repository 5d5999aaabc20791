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

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fedprint/attack.h"
#include "fedprint/errors.h"

namespace fedprint {

// Shortest augmenting path with row/column potentials (u, v). Rows are
// inserted one at a time; each insertion runs a Dijkstra-like search over
// reduced costs c(i, j) - u[i] - v[j] >= 0. Columns are 1-based internally,
// column 0 being the virtual source. Ties resolve to the lowest column index.
LsapSolution solve_lsap(const Matrix& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) {
    throw UsageError("solve_lsap: cost matrix must be square, got " +
                     std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()));
  }
  for (double x : cost.flat()) {
    if (!std::isfinite(x)) throw UsageError("solve_lsap: non-finite cost");
  }
  LsapSolution out;
  if (n == 0) return out;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // column -> row (1-based), 0 = free
  std::vector<std::size_t> way(n + 1, 0);
  std::vector<double> min_reduced(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(min_reduced.begin(), min_reduced.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < min_reduced[j]) {
          min_reduced[j] = reduced;
          way[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    // Flip the augmenting path back to the source.
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  out.assignment.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.assignment[match[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) out.cost += cost(i, out.assignment[i]);
  return out;
}

}  // namespace fedprint
