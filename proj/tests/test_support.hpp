#pragma once

// Test-only helpers: dense oracles kept independent of the sparse/Krylov
// implementation paths they check.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gnp/csr.hpp"
#include "gnp/dense.hpp"
#include "gnp/rng.hpp"

namespace gnp::test {

inline DenseMatrix dense_from_csr(const CsrMatrix& a) {
  DenseMatrix m(a.n, a.n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      m(i, a.col_idx[k]) = a.values[k];
  return m;
}

inline CsrMatrix csr_from_dense(const DenseMatrix& m) {
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) {
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(m(i, j));
      }
  return csr_from_triplets(m.rows(), rows, cols, vals);
}

inline CsrMatrix csr_identity(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::vector<double> ones(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return csr_from_triplets(n, idx, idx, ones);
}

inline CsrMatrix csr_diag(const std::vector<double>& d) {
  std::vector<std::size_t> idx(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) idx[i] = i;
  return csr_from_triplets(d.size(), idx, idx, d);
}

// dense matvec, independent of spmv
inline DenseVector dense_matvec(const DenseMatrix& m, const DenseVector& x) {
  DenseVector y(m.rows(), 0.0);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) y[i] += m(i, j) * x[j];
  return y;
}

// LU with partial pivoting; the dense solve oracle
inline DenseVector dense_lu_solve(DenseMatrix a, DenseVector b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw std::invalid_argument("dense_lu_solve: shape mismatch");
  std::vector<std::size_t> piv(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0.0) throw std::runtime_error("dense_lu_solve: singular");
    piv[k] = p;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  DenseVector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

inline DenseMatrix dense_inverse(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  DenseMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    DenseVector e(n, 0.0);
    e[j] = 1.0;
    inv.set_col(j, dense_lu_solve(a, e));
  }
  return inv;
}

// random dense square matrix with entries U[-1,1] and a dominant diagonal
inline DenseMatrix random_dominant_dense(std::size_t n, Rng& rng,
                                         double dominance = 2.0) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double abs_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      m(i, j) = rng.uniform_symmetric(1.0);
      abs_sum += std::abs(m(i, j));
    }
    m(i, i) = dominance * (abs_sum + 0.5);
  }
  return m;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace gnp::test
