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

#include "fedprint/numerics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedprint/errors.h"

namespace fedprint {
namespace {

void require_same_length(std::span<const double> u, std::span<const double> v,
                         const char* op) {
  if (u.size() != v.size()) {
    throw UsageError(std::string(op) + ": length mismatch (" +
                     std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

double dot(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double l2_norm(std::span<const double> v) {
  if (v.empty()) throw UsageError("l2_norm: empty vector");
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Vector normalize(std::span<const double> v) {
  const double norm = l2_norm(v);
  if (norm == 0.0) {
    throw DegenerateInputError("normalize: zero vector has no direction");
  }
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "cosine_similarity");
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) {
    throw UsageError("cosine_similarity: zero vector");
  }
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double squared_euclidean_distance(std::span<const double> u,
                                  std::span<const double> v) {
  require_same_length(u, v, "euclidean_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  return std::sqrt(squared_euclidean_distance(u, v));
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.flat()) s += x * x;
  return std::sqrt(s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw UsageError("matmul: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto crow = c.row(i);
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

EigenDecomposition symmetric_eigen(const Matrix& a, std::size_t k,
                                   const JacobiOptions& options) {
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() != n) {
    throw UsageError("symmetric_eigen: matrix must be square and non-empty");
  }
  if (k < 1 || k > n) {
    throw UsageError("symmetric_eigen: k must lie in [1, n], got " +
                     std::to_string(k));
  }
  double max_abs = 0.0;
  for (double x : a.flat()) max_abs = std::max(max_abs, std::abs(x));
  const double sym_tol = 1e-10 * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > sym_tol) {
        throw UsageError("symmetric_eigen: matrix is not symmetric at (" +
                         std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }

  // Work on the symmetrized copy so that rounding asymmetry cannot leak in.
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = 0.5 * (a(i, j) + a(j, i));
  Matrix v = Matrix::identity(n);

  const double scale = frobenius_norm(w);
  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * w(i, j) * w(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_diagonal() > options.tolerance * scale) {
    if (sweep == options.max_sweeps) {
      throw NumericalError("symmetric_eigen: no convergence after " +
                           std::to_string(sweep) + " sweeps");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double app = w(p, p);
        const double aqq = w(q, q);
        // Rotation angle chosen to annihilate w(p, q); the smaller root of
        // t^2 + 2 theta t - 1 = 0 keeps |angle| <= pi/4.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t r = 0; r < n; ++r) {
          const double wrp = w(r, p);
          const double wrq = w(r, q);
          w(r, p) = c * wrp - s * wrq;
          w(r, q) = s * wrp + c * wrq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double wpr = w(p, r);
          const double wqr = w(q, r);
          w(p, r) = c * wpr - s * wqr;
          w(q, r) = s * wpr + c * wqr;
        }
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return w(x, x) < w(y, y);
  });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.values.resize(k);
  out.vectors = Matrix(n, k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t col = order[i];
    out.values[i] = w(col, col);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, i) = v(r, col);
  }
  return out;
}

}  // namespace fedprint
