#include "cthge/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace cthge {

namespace {

// Core i-k-j kernel: out (r x n) accumulates a (r x m) * b (m x n).
void gemm_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.rows && out.rows == a.rows && out.cols == b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  out = Matrix(a.rows, b.cols);
  gemm_acc(a, b, out);
}

void matmul_add(const Matrix& a, const Matrix& b, Matrix& out) {
  gemm_acc(a, b, out);
}

void matmul_at(const Matrix& a, const Matrix& b, Matrix& out) {
  out = Matrix(a.cols, b.cols);
  matmul_at_add(a, b, out);
}

void matmul_at_add(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.rows == b.rows && out.rows == a.cols && out.cols == b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      double aki = arow[i];
      if (aki == 0.0) continue;
      double* orow = out.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += aki * brow[j];
      }
    }
  }
}

void matmul_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.cols);
  out = Matrix(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      orow[j] = dot(arow, b.row(j), a.cols);
    }
  }
}

void add_inplace(Matrix& a, const Matrix& b) {
  assert(a.same_shape(b));
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void add_row_broadcast(Matrix& a, const Matrix& bias) {
  assert(bias.rows == 1 && bias.cols == a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) arow[j] += bias.at(0, j);
  }
}

void column_sums(const Matrix& a, Matrix& out) {
  out = Matrix(1, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) out.at(0, j) += arow[j];
  }
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* in = logits.row(i);
    double* o = out.row(i);
    double mx = in[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) o[j] /= sum;
  }
  return out;
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace cthge
