#pragma once

#include <cstdint>
#include <vector>

#include "cthge/matrix.hpp"

namespace cthge {

// Compressed sparse row matrix. Duplicate (row, col) entries are
// allowed and act additively in products, which is how multi-edges
// between the same node pair keep their multiplicity.
struct Csr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;  // rows + 1
  std::vector<std::uint32_t> col;    // nnz
  std::vector<double> val;           // nnz

  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    double val;
  };

  // Builds from entries; sorts by (row, col) so the layout is canonical
  // regardless of input order. Duplicates are kept, not merged.
  static Csr from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

  std::size_t nnz() const { return col.size(); }

  Csr transpose() const;

  // out = this * dense  (rows x dense.cols)
  void multiply(const Matrix& dense, Matrix& out) const;

  Matrix to_dense() const;
};

}  // namespace cthge
