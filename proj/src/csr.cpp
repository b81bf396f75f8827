#include "cthge/csr.hpp"

#include <algorithm>
#include <cassert>

namespace cthge {

Csr Csr::from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.val < b.val;
  });
  Csr m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  m.col.reserve(entries.size());
  m.val.reserve(entries.size());
  for (const Entry& e : entries) {
    assert(e.row < rows && e.col < cols);
    m.row_ptr[e.row + 1]++;
    m.col.push_back(e.col);
    m.val.push_back(e.val);
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

Csr Csr::transpose() const {
  std::vector<Entry> entries;
  entries.reserve(nnz());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      entries.push_back({col[k], static_cast<std::uint32_t>(r), val[k]});
    }
  }
  return from_entries(cols, rows, std::move(entries));
}

void Csr::multiply(const Matrix& dense, Matrix& out) const {
  assert(dense.rows == cols);
  out = Matrix(rows, dense.cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double* orow = out.row(r);
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      double v = val[k];
      if (v == 0.0) continue;
      const double* drow = dense.row(col[k]);
      for (std::size_t j = 0; j < dense.cols; ++j) orow[j] += v * drow[j];
    }
  }
}

Matrix Csr::to_dense() const {
  Matrix d(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      d.at(r, col[k]) += val[k];
    }
  }
  return d;
}

}  // namespace cthge
