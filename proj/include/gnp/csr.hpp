#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gnp/dense.hpp"

namespace gnp {

// Square sparse matrix in CSR form. Immutable after construction; the only
// access patterns downstream are matrix-vector and matrix-dense products.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // n+1 offsets, non-decreasing
  std::vector<std::size_t> col_idx;  // strictly increasing within a row
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
};

// Builds a CSR matrix from (row, col, value) triplets, 0-based. Duplicate
// entries are summed (Matrix Market convention); columns are sorted per row.
CsrMatrix csr_from_triplets(std::size_t n,
                            std::vector<std::size_t> rows,
                            std::vector<std::size_t> cols,
                            std::vector<double> vals);

DenseVector spmv(const CsrMatrix& a, const DenseVector& x);
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& x);

// y = A^T x without forming the transpose.
DenseVector spmv_transpose(const CsrMatrix& a, const DenseVector& x);
DenseMatrix spmm_transpose(const CsrMatrix& a, const DenseMatrix& x);

CsrMatrix transpose(const CsrMatrix& a);

// min(max abs row sum, max abs column sum); Gershgorin bound on the spectral
// radius. Returns 1.0 for the all-zero matrix.
double gershgorin_gamma(const CsrMatrix& a);

CsrMatrix prescale(const CsrMatrix& a, double gamma);

// FNV-1a over the CSR arrays; used to tie checkpoints to their matrix.
std::uint64_t csr_content_hash(const CsrMatrix& a);

}  // namespace gnp
