#include "gnp/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace gnp {

namespace {

class JacobiOperator final : public FlexibleOperator {
 public:
  explicit JacobiOperator(DenseVector inv_diag)
      : inv_diag_(std::move(inv_diag)) {}
  DenseVector apply(const DenseVector& v) const override {
    if (v.size() != inv_diag_.size())
      throw std::invalid_argument("jacobi: dimension mismatch");
    DenseVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = inv_diag_[i] * v[i];
    return out;
  }
  std::string name() const override { return "jacobi"; }

 private:
  DenseVector inv_diag_;
};

class InnerGmresOperator final : public FlexibleOperator {
 public:
  InnerGmresOperator(const CsrMatrix& a, std::size_t iters, double tol)
      : a_(a), iters_(iters), tol_(tol) {}
  DenseVector apply(const DenseVector& v) const override {
    SolveConfig cfg;
    cfg.rtol = tol_;
    cfg.maxiters = iters_;
    cfg.restart = iters_;  // single unrestarted cycle
    // Any terminal status still carries the best iterate found.
    return fgmres_solve(a_, v, nullptr, DenseVector(a_.n, 0.0), cfg).x;
  }
  std::string name() const override { return "gmres"; }

 private:
  const CsrMatrix& a_;
  std::size_t iters_;
  double tol_;
};

class Ilu0Operator final : public FlexibleOperator {
 public:
  explicit Ilu0Operator(Ilu0Factors f) : f_(std::move(f)) {}
  DenseVector apply(const DenseVector& v) const override {
    const CsrMatrix& lu = f_.lu;
    if (v.size() != lu.n)
      throw std::invalid_argument("ilu0: dimension mismatch");
    // forward solve L y = v (unit diagonal)
    DenseVector y(lu.n);
    for (std::size_t i = 0; i < lu.n; ++i) {
      double s = v[i];
      for (std::size_t k = lu.row_ptr[i]; k < f_.diag_pos[i]; ++k)
        s -= lu.values[k] * y[lu.col_idx[k]];
      y[i] = s;
    }
    // backward solve U x = y
    DenseVector x(lu.n);
    for (std::size_t i = lu.n; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = f_.diag_pos[i] + 1; k < lu.row_ptr[i + 1]; ++k)
        s -= lu.values[k] * x[lu.col_idx[k]];
      x[i] = s / lu.values[f_.diag_pos[i]];
    }
    return x;
  }
  std::string name() const override { return "ilu0"; }

 private:
  Ilu0Factors f_;
};

// Position of column j in row i of lu, or npos.
std::size_t find_in_row(const CsrMatrix& lu, std::size_t i, std::size_t j) {
  const auto begin = lu.col_idx.begin() + lu.row_ptr[i];
  const auto end = lu.col_idx.begin() + lu.row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - lu.col_idx.begin());
}

}  // namespace

std::unique_ptr<FlexibleOperator> jacobi_build(const CsrMatrix& a) {
  DenseVector inv_diag(a.n, 1.0);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      if (a.col_idx[k] == i) {
        if (std::abs(a.values[k]) >= 1e-300) inv_diag[i] = 1.0 / a.values[k];
        break;
      }
    }
  }
  return std::make_unique<JacobiOperator>(std::move(inv_diag));
}

std::unique_ptr<FlexibleOperator> inner_gmres_build(const CsrMatrix& a,
                                                    std::size_t inner_iters,
                                                    double inner_tol) {
  return std::make_unique<InnerGmresOperator>(a, inner_iters, inner_tol);
}

Ilu0Factors ilu0_factor(const CsrMatrix& a) {
  Ilu0Factors f;
  f.lu = a;
  f.diag_pos.resize(a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    const std::size_t pos = find_in_row(f.lu, i, i);
    if (pos == static_cast<std::size_t>(-1))
      throw ConstructionError("ilu0: structurally zero diagonal at row " +
                              std::to_string(i));
    f.diag_pos[i] = pos;
  }

  CsrMatrix& lu = f.lu;
  for (std::size_t i = 1; i < a.n; ++i) {
    for (std::size_t kp = lu.row_ptr[i]; kp < f.diag_pos[i]; ++kp) {
      const std::size_t k = lu.col_idx[kp];
      const double pivot = lu.values[f.diag_pos[k]];
      if (pivot == 0.0)
        throw ConstructionError("ilu0: zero pivot at row " + std::to_string(k));
      const double factor = lu.values[kp] / pivot;
      lu.values[kp] = factor;
      // update the rest of row i within its own pattern
      for (std::size_t jp = kp + 1; jp < lu.row_ptr[i + 1]; ++jp) {
        const std::size_t j = lu.col_idx[jp];
        const std::size_t kj = find_in_row(lu, k, j);
        if (kj != static_cast<std::size_t>(-1) && j > k)
          lu.values[jp] -= factor * lu.values[kj];
      }
    }
    if (lu.values[f.diag_pos[i]] == 0.0)
      throw ConstructionError("ilu0: zero pivot at row " + std::to_string(i));
  }
  return f;
}

std::unique_ptr<FlexibleOperator> ilu0_build(Ilu0Factors f) {
  return std::make_unique<Ilu0Operator>(std::move(f));
}

}  // namespace gnp
