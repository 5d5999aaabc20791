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

#ifndef FEDPRINT_NUMERICS_H_
#define FEDPRINT_NUMERICS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace fedprint {

// All arithmetic is carried out in 64-bit floating point.
using Vector = std::vector<double>;

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> u, std::span<const double> v);

// Euclidean norm. Throws UsageError on an empty vector.
double l2_norm(std::span<const double> v);

// v / ||v||. Throws DegenerateInputError when ||v|| == 0.
Vector normalize(std::span<const double> v);

// Cosine of the angle between u and v, clamped to [-1, 1].
double cosine_similarity(std::span<const double> u, std::span<const double> v);

double squared_euclidean_distance(std::span<const double> u,
                                  std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);

// Frobenius norm of a matrix.
double frobenius_norm(const Matrix& a);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

struct EigenDecomposition {
  Vector values;          // ascending
  Matrix vectors;         // n x k, column i pairs with values[i]
  int sweeps = 0;
};

struct JacobiOptions {
  double tolerance = 1e-10;  // off-diagonal Frobenius mass relative to ||A||_F
  int max_sweeps = 100;
};

// The k algebraically smallest eigenpairs of a symmetric matrix, computed by
// cyclic Jacobi rotations.
EigenDecomposition symmetric_eigen(const Matrix& a, std::size_t k,
                                   const JacobiOptions& options = {});

}  // namespace fedprint

#endif  // FEDPRINT_NUMERICS_H_
