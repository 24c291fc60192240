#include "gnp/csr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gnp {

CsrMatrix csr_from_triplets(std::size_t n,
                            std::vector<std::size_t> rows,
                            std::vector<std::size_t> cols,
                            std::vector<double> vals) {
  const std::size_t m = vals.size();
  if (rows.size() != m || cols.size() != m)
    throw std::invalid_argument("triplet arrays must have equal length");
  for (std::size_t k = 0; k < m; ++k) {
    if (rows[k] >= n || cols[k] >= n)
      throw std::out_of_range("triplet index out of range");
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a] != rows[b]) return rows[a] < rows[b];
    return cols[a] < cols[b];
  });

  CsrMatrix out;
  out.n = n;
  out.row_ptr.assign(n + 1, 0);
  out.col_idx.reserve(m);
  out.values.reserve(m);

  std::size_t last_row = n;  // sentinel
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t t = order[k];
    if (!out.values.empty() && rows[t] == last_row &&
        cols[t] == out.col_idx.back()) {
      out.values.back() += vals[t];  // duplicate entry: sum
    } else {
      last_row = rows[t];
      out.col_idx.push_back(cols[t]);
      out.values.push_back(vals[t]);
      out.row_ptr[rows[t] + 1]++;
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.row_ptr[i + 1] += out.row_ptr[i];
  return out;
}

DenseVector spmv(const CsrMatrix& a, const DenseVector& x) {
  if (x.size() != a.n) throw std::invalid_argument("spmv: dimension mismatch");
  DenseVector y(a.n, 0.0);
  for (std::size_t i = 0; i < a.n; ++i) {
    double s = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      s += a.values[k] * x[a.col_idx[k]];
    y[i] = s;
  }
  return y;
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& x) {
  if (x.rows() != a.n) throw std::invalid_argument("spmm: dimension mismatch");
  DenseMatrix y(a.n, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double* xj = x.col(j);
    double* yj = y.col(j);
    for (std::size_t i = 0; i < a.n; ++i) {
      double s = 0.0;
      for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
        s += a.values[k] * xj[a.col_idx[k]];
      yj[i] = s;
    }
  }
  return y;
}

DenseVector spmv_transpose(const CsrMatrix& a, const DenseVector& x) {
  if (x.size() != a.n)
    throw std::invalid_argument("spmv_transpose: dimension mismatch");
  DenseVector y(a.n, 0.0);
  for (std::size_t i = 0; i < a.n; ++i) {
    const double xi = x[i];
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      y[a.col_idx[k]] += a.values[k] * xi;
  }
  return y;
}

DenseMatrix spmm_transpose(const CsrMatrix& a, const DenseMatrix& x) {
  if (x.rows() != a.n)
    throw std::invalid_argument("spmm_transpose: dimension mismatch");
  DenseMatrix y(a.n, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double* xj = x.col(j);
    double* yj = y.col(j);
    for (std::size_t i = 0; i < a.n; ++i) {
      const double xi = xj[i];
      for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
        yj[a.col_idx[k]] += a.values[k] * xi;
    }
  }
  return y;
}

CsrMatrix transpose(const CsrMatrix& a) {
  CsrMatrix t;
  t.n = a.n;
  t.row_ptr.assign(a.n + 1, 0);
  t.col_idx.resize(a.nnz());
  t.values.resize(a.nnz());
  for (std::size_t k = 0; k < a.nnz(); ++k) t.row_ptr[a.col_idx[k] + 1]++;
  for (std::size_t i = 0; i < a.n; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::size_t pos = next[a.col_idx[k]]++;
      t.col_idx[pos] = i;
      t.values[pos] = a.values[k];
    }
  }
  return t;
}

double gershgorin_gamma(const CsrMatrix& a) {
  std::vector<double> col_sum(a.n, 0.0);
  double max_row = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    double row_sum = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const double v = std::abs(a.values[k]);
      row_sum += v;
      col_sum[a.col_idx[k]] += v;
    }
    max_row = std::max(max_row, row_sum);
  }
  double max_col = 0.0;
  for (double c : col_sum) max_col = std::max(max_col, c);
  const double gamma = std::min(max_row, max_col);
  return gamma == 0.0 ? 1.0 : gamma;
}

CsrMatrix prescale(const CsrMatrix& a, double gamma) {
  if (gamma == 0.0) throw std::invalid_argument("prescale: gamma must be nonzero");
  CsrMatrix out = a;
  for (double& v : out.values) v /= gamma;
  return out;
}

std::uint64_t csr_content_hash(const CsrMatrix& a) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t bytes) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t n64 = a.n;
  mix(&n64, sizeof n64);
  for (std::size_t v : a.row_ptr) {
    const std::uint64_t x = v;
    mix(&x, sizeof x);
  }
  for (std::size_t v : a.col_idx) {
    const std::uint64_t x = v;
    mix(&x, sizeof x);
  }
  mix(a.values.data(), a.values.size() * sizeof(double));
  return h;
}

}  // namespace gnp
