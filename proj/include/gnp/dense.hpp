#pragma once

#include <cstddef>
#include <vector>

namespace gnp {

using DenseVector = std::vector<double>;

// Column-major dense matrix. Small helper type; no BLAS behind it.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  double* col(std::size_t j) { return data_.data() + j * rows_; }
  const double* col(std::size_t j) const { return data_.data() + j * rows_; }

  DenseVector col_copy(std::size_t j) const {
    return DenseVector(col(j), col(j) + rows_);
  }
  void set_col(std::size_t j, const DenseVector& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(const DenseVector& a, const DenseVector& b);
double norm2(const DenseVector& v);
void axpy(double alpha, const DenseVector& x, DenseVector& y);  // y += alpha*x
void scale(DenseVector& v, double alpha);

// C = A^T * B for tall matrices sharing the row count.
DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B.
DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& m);

}  // namespace gnp
