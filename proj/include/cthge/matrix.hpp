#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace cthge {

// Row-major dense matrix of doubles. Small-scale workhorse for the
// whole project; no external linear algebra dependency.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }

  double& at(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  double at(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  void fill(double v) { data.assign(data.size(), v); }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
// out = a^T * b
void matmul_at(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b^T
void matmul_bt(const Matrix& a, const Matrix& b, Matrix& out);
// out += a * b
void matmul_add(const Matrix& a, const Matrix& b, Matrix& out);
// out += a^T * b
void matmul_at_add(const Matrix& a, const Matrix& b, Matrix& out);

void add_inplace(Matrix& a, const Matrix& b);
// Adds the single-row matrix `bias` to every row of `a`.
void add_row_broadcast(Matrix& a, const Matrix& bias);
// out(0, j) = sum_i a(i, j)
void column_sums(const Matrix& a, Matrix& out);

// Numerically stable per-row softmax.
Matrix softmax_rows(const Matrix& logits);

// Deterministic pairwise summation; also more accurate than a naive
// left-to-right loop.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

double dot(const double* a, const double* b, std::size_t n);

}  // namespace cthge
