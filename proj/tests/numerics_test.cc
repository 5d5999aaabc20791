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

#include <cmath>

#include "fedprint/errors.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace fedprint {
namespace {

TEST(VectorOps, DotAndNorm) {
  const Vector u{3.0, 4.0};
  const Vector v{1.0, -2.0};
  EXPECT_DOUBLE_EQ(dot(u, v), -5.0);
  EXPECT_DOUBLE_EQ(l2_norm(u), 5.0);
  EXPECT_THROW(l2_norm(Vector{}), UsageError);
}

TEST(VectorOps, NormalizeRejectsZero) {
  const Vector n = normalize(Vector{0.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(n[1], 0.6);
  EXPECT_DOUBLE_EQ(n[2], 0.8);
  EXPECT_THROW(normalize(Vector{0.0, 0.0}), DegenerateInputError);
}

TEST(VectorOps, CosineSimilarity) {
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1, 0}, Vector{0, 2}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1, 1}, Vector{2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1, 1}, Vector{-3, -3}), -1.0);
  EXPECT_THROW(cosine_similarity(Vector{0, 0}, Vector{1, 0}), UsageError);
  EXPECT_THROW(cosine_similarity(Vector{1}, Vector{1, 0}), UsageError);
}

TEST(VectorOps, CosineStaysInRange) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20);
    const Vector u = testing::random_vector(rng, n);
    Vector v = u;
    if (trial % 2 == 0) v = testing::random_vector(rng, n);
    for (double& x : v) x *= 3.0;
    const double c = cosine_similarity(u, v);
    EXPECT_LE(c, 1.0);
    EXPECT_GE(c, -1.0);
  }
}

TEST(VectorOps, Distances) {
  EXPECT_DOUBLE_EQ(squared_euclidean_distance(Vector{1, 2}, Vector{4, 6}), 25.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(Vector{1, 2}, Vector{4, 6}), 5.0);
}

TEST(MatrixOps, MatmulTranspose) {
  Matrix a(2, 3);
  for (std::size_t i = 0; i < 6; ++i) a.flat()[i] = double(i + 1);
  const Matrix at = transpose(a);
  EXPECT_EQ(at.rows(), 3u);
  EXPECT_EQ(at(2, 1), 6.0);
  const Matrix g = matmul(a, at);
  EXPECT_EQ(g(0, 0), 14.0);
  EXPECT_EQ(g(0, 1), 32.0);
  EXPECT_EQ(g(1, 1), 77.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(a), std::sqrt(91.0));
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
}

TEST(SymmetricEigen, KnownTwoByTwo) {
  Matrix a(2, 2);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = 2;
  const EigenDecomposition e = symmetric_eigen(a, 2);
  EXPECT_NEAR(e.values[0], 1.0, 1e-12);
  EXPECT_NEAR(e.values[1], 3.0, 1e-12);
  EXPECT_NEAR(std::fabs(e.vectors(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(SymmetricEigen, DiagonalInputNeedsNoSweeps) {
  const Vector d{3.0, -1.0, 2.0};
  const EigenDecomposition e = symmetric_eigen(Matrix::diagonal(d), 2);
  EXPECT_EQ(e.values, (Vector{-1.0, 2.0}));
  EXPECT_EQ(e.vectors.cols(), 2u);
}

TEST(SymmetricEigen, RejectsBadInput) {
  Matrix a(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(symmetric_eigen(a, 1), UsageError);
  EXPECT_THROW(symmetric_eigen(Matrix(2, 3), 1), UsageError);
  EXPECT_THROW(symmetric_eigen(Matrix::identity(3), 0), UsageError);
  EXPECT_THROW(symmetric_eigen(Matrix::identity(3), 4), UsageError);
}

TEST(SymmetricEigen, NonConvergenceReportsSweeps) {
  Rng rng(5);
  const Matrix a = testing::random_symmetric(rng, 8);
  try {
    symmetric_eigen(a, 2, JacobiOptions{1e-10, 1});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("1 sweep"), std::string::npos) << e.what();
  }
}

// Property: eigenvalues agree with inertia bisection, eigenpairs satisfy
// A v = lambda v, and the returned vectors are orthonormal.
TEST(SymmetricEigen, MatchesInertiaBisection) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(11);
    const Matrix a = testing::random_symmetric(rng, n);
    const EigenDecomposition e = symmetric_eigen(a, n);
    ASSERT_EQ(e.values.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(e.values[i], testing::bisect_eigenvalue(a, i), 1e-9)
          << "n=" << n << " i=" << i;
      if (i > 0) EXPECT_LE(e.values[i - 1], e.values[i]);
      for (std::size_t r = 0; r < n; ++r) {
        double av = 0.0;
        for (std::size_t c = 0; c < n; ++c) av += a(r, c) * e.vectors(c, i);
        EXPECT_NEAR(av, e.values[i] * e.vectors(r, i), 1e-8);
      }
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t r = 0; r < n; ++r) g += e.vectors(r, i) * e.vectors(r, j);
        EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-10);
      }
    }
  }
}

}  // namespace
}  // namespace fedprint
