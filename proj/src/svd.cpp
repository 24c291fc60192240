#include "gnp/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gnp {

SvdResult jacobi_svd(const DenseMatrix& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  if (rows < cols) throw std::invalid_argument("jacobi_svd: matrix must be tall");

  DenseMatrix b = a;
  DenseMatrix v(cols, cols);
  for (std::size_t i = 0; i < cols; ++i) v(i, i) = 1.0;

  const double tol = 1e-15;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        const double* bp = b.col(p);
        const double* bq = b.col(q);
        for (std::size_t r = 0; r < rows; ++r) {
          app += bp[r] * bp[r];
          aqq += bq[r] * bq[r];
          apq += bp[r] * bq[r];
        }
        if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double t1 = b(r, p), t2 = b(r, q);
          b(r, p) = cs * t1 - sn * t2;
          b(r, q) = sn * t1 + cs * t2;
        }
        for (std::size_t r = 0; r < cols; ++r) {
          const double t1 = v(r, p), t2 = v(r, q);
          v(r, p) = cs * t1 - sn * t2;
          v(r, q) = sn * t1 + cs * t2;
        }
      }
    }
    if (!rotated) break;
  }

  DenseVector s(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    const double* bj = b.col(j);
    double nrm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) nrm += bj[r] * bj[r];
    s[j] = std::sqrt(nrm);
  }

  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&s](std::size_t i, std::size_t j) { return s[i] > s[j]; });

  SvdResult out;
  out.u = DenseMatrix(rows, cols);
  out.v = DenseMatrix(cols, cols);
  out.s.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t src = order[j];
    out.s[j] = s[src];
    if (s[src] > 0.0) {
      for (std::size_t r = 0; r < rows; ++r) out.u(r, j) = b(r, src) / s[src];
    }
    for (std::size_t r = 0; r < cols; ++r) out.v(r, j) = v(r, src);
  }
  return out;
}

}  // namespace gnp
