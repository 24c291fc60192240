#pragma once

#include "gnp/dense.hpp"

namespace gnp {

// Thin SVD a = u * diag(s) * v^T with u: rows x k, v: cols x k, k = cols,
// singular values sorted descending. One-sided Jacobi; intended for small
// tall matrices (the Hessenberg factors here are at most 41 x 40).
struct SvdResult {
  DenseMatrix u;
  DenseVector s;
  DenseMatrix v;
};

SvdResult jacobi_svd(const DenseMatrix& a);

}  // namespace gnp
