#include <doctest.h>

#include <cmath>

#include "gnp/baselines.hpp"
#include "gnp/gen.hpp"
#include "test_support.hpp"

using namespace gnp;
using namespace gnp::test;

namespace {

// dense L (unit diagonal) and U rebuilt from the combined factors
void split_factors(const Ilu0Factors& f, DenseMatrix& l, DenseMatrix& u) {
  const CsrMatrix& lu = f.lu;
  l = DenseMatrix(lu.n, lu.n);
  u = DenseMatrix(lu.n, lu.n);
  for (std::size_t i = 0; i < lu.n; ++i) {
    l(i, i) = 1.0;
    for (std::size_t k = lu.row_ptr[i]; k < lu.row_ptr[i + 1]; ++k) {
      const std::size_t j = lu.col_idx[k];
      if (j < i)
        l(i, j) = lu.values[k];
      else
        u(i, j) = lu.values[k];
    }
  }
}

std::size_t outer_iterations(const SolveOutcome& out) {
  return out.history.back().iteration;
}

}  // namespace

TEST_CASE("jacobi: exact inverse of a diagonal matrix") {
  const CsrMatrix d = csr_diag({2.0, 4.0, -0.5});
  const auto m = jacobi_build(d);
  CHECK(m->name() == "jacobi");
  const DenseVector out = m->apply({2.0, 4.0, -0.5});
  CHECK(out == DenseVector{1.0, 1.0, 1.0});

  // one-step convergence under fgmres
  const DenseVector b = spmv(d, DenseVector(3, 1.0));
  const SolveOutcome s = fgmres_solve(d, b, m.get(), DenseVector(3, 0.0), {});
  CHECK(s.status == SolveStatus::converged);
  CHECK(outer_iterations(s) == 1);
}

TEST_CASE("jacobi: hand values and linearity") {
  // diag(A) = [2, 3]; off-diagonals are ignored
  const CsrMatrix a =
      csr_from_triplets(2, {0, 0, 1, 1}, {0, 1, 0, 1}, {2.0, 5.0, 7.0, 3.0});
  const auto m = jacobi_build(a);
  const DenseVector out = m->apply({6.0, 6.0});
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 2.0);

  Rng rng(3);
  const DenseVector u = rng.gaussian_vector(2);
  const DenseVector v = rng.gaussian_vector(2);
  DenseVector uv = u;
  axpy(2.0, v, uv);
  const DenseVector lhs = m->apply(uv);
  DenseVector rhs = m->apply(u);
  axpy(2.0, m->apply(v), rhs);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-15 * (1.0 + std::abs(rhs[i])));
}

TEST_CASE("jacobi: tiny or missing diagonal falls back to 1.0") {
  {
    const CsrMatrix a = csr_diag({1e-301, 2.0});
    const auto m = jacobi_build(a);
    const DenseVector out = m->apply({5.0, 4.0});
    CHECK(out[0] == 5.0);
    CHECK(out[1] == 2.0);
  }
  {
    // row 0 has no diagonal entry at all
    const CsrMatrix a = csr_from_triplets(2, {0, 1}, {1, 1}, {3.0, 2.0});
    const auto m = jacobi_build(a);
    const DenseVector out = m->apply({7.0, 4.0});
    CHECK(out[0] == 7.0);
    CHECK(out[1] == 2.0);
  }
}

TEST_CASE("inner gmres: identity and eigenvector inputs resolve in one step") {
  const CsrMatrix eye = csr_identity(4);
  const auto m = inner_gmres_build(eye);
  CHECK(m->name() == "gmres");
  const DenseVector v{1.0, -2.0, 3.0, 0.5};
  const DenseVector out = m->apply(v);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(out[i] - v[i]) <= 1e-12);

  // e0 is an eigenvector of diag(2, 5) with eigenvalue 2, so the one-step
  // Krylov space already contains the solution e0 / 2
  const CsrMatrix d = csr_diag({2.0, 5.0});
  const auto md = inner_gmres_build(d);
  const DenseVector z = md->apply({1.0, 0.0});
  CHECK(std::abs(z[0] - 0.5) <= 1e-12);
  CHECK(std::abs(z[1]) <= 1e-12);
}

TEST_CASE("inner gmres with a full cycle and zero tolerance inverts A") {
  const std::size_t n = 12;
  const CsrMatrix a = gen_random_nonsymmetric(n, 4, 1.5, 17);
  const auto m = inner_gmres_build(a, n, 0.0);
  Rng rng(18);
  const DenseVector v = rng.gaussian_vector(n);
  const DenseVector got = m->apply(v);
  const DenseVector want = dense_lu_solve(dense_from_csr(a), v);
  DenseVector diff = got;
  axpy(-1.0, want, diff);
  CHECK(norm2(diff) <= 1e-8 * norm2(want));
}

TEST_CASE("inner gmres cuts outer iterations versus no preconditioner") {
  const CsrMatrix a = gen_convection_diffusion(12, 0.6);
  const DenseVector b = spmv(a, DenseVector(a.n, 1.0));
  SolveConfig cfg;
  cfg.maxiters = 300;
  cfg.restart = 30;

  const SolveOutcome plain = gmres_solve(a, b, cfg);
  const auto m = inner_gmres_build(a);
  const SolveOutcome pre =
      fgmres_solve(a, b, m.get(), DenseVector(a.n, 0.0), cfg);
  REQUIRE(pre.status == SolveStatus::converged);
  REQUIRE(plain.status == SolveStatus::converged);
  CHECK(outer_iterations(pre) < outer_iterations(plain));
}

TEST_CASE("ilu0 of a triangular matrix applies the exact inverse") {
  // upper triangular: L = I, U = A
  const CsrMatrix a = csr_from_triplets(3, {0, 0, 1, 1, 2}, {0, 2, 1, 2, 2},
                                        {2.0, 1.0, 4.0, -1.0, 5.0});
  const Ilu0Factors f = ilu0_factor(a);
  const auto m = ilu0_build(f);
  CHECK(m->name() == "ilu0");
  Rng rng(4);
  const DenseVector v = rng.gaussian_vector(3);
  const DenseVector got = m->apply(v);
  const DenseVector want = dense_lu_solve(dense_from_csr(a), v);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(got[i] - want[i]) <= 1e-14 * (1.0 + std::abs(want[i])));
}

TEST_CASE("ilu0 of a tridiagonal matrix is the exact LU") {
  // tridiagonal systems have no fill-in, so ILU(0) = LU and the product
  // reproduces A everywhere
  const std::size_t n = 10;
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(i);
    cols.push_back(i);
    vals.push_back(4.0 + 0.1 * static_cast<double>(i));
    if (i > 0) {
      rows.push_back(i);
      cols.push_back(i - 1);
      vals.push_back(-1.0);
    }
    if (i + 1 < n) {
      rows.push_back(i);
      cols.push_back(i + 1);
      vals.push_back(-1.5);
    }
  }
  const CsrMatrix a = csr_from_triplets(n, rows, cols, vals);
  const Ilu0Factors f = ilu0_factor(a);
  DenseMatrix l, u;
  split_factors(f, l, u);
  const DenseMatrix prod = gemm_nn(l, u);
  const DenseMatrix ad = dense_from_csr(a);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::abs(prod(i, j) - ad(i, j)) <= 1e-12);

  const auto m = ilu0_build(f);
  Rng rng(5);
  const DenseVector v = rng.gaussian_vector(n);
  const DenseVector got = m->apply(v);
  const DenseVector want = dense_lu_solve(ad, v);
  DenseVector diff = got;
  axpy(-1.0, want, diff);
  CHECK(norm2(diff) <= 1e-12 * norm2(want));
}

TEST_CASE("ilu0 product matches A on the sparsity pattern") {
  const CsrMatrix a = gen_random_nonsymmetric(25, 5, 1.5, 23);
  const Ilu0Factors f = ilu0_factor(a);
  DenseMatrix l, u;
  split_factors(f, l, u);
  const DenseMatrix prod = gemm_nn(l, u);
  const DenseMatrix ad = dense_from_csr(a);
  double amax = 0.0;
  for (double x : ad.data()) amax = std::max(amax, std::abs(x));
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::size_t j = a.col_idx[k];
      CHECK(std::abs(prod(i, j) - ad(i, j)) <= 1e-12 * amax);
    }
}

TEST_CASE("ilu0 construction failures") {
  // structurally missing diagonal
  const CsrMatrix miss = csr_from_triplets(2, {0, 1}, {1, 0}, {1.0, 1.0});
  CHECK_THROWS_AS(ilu0_factor(miss), ConstructionError);

  // exact zero pivot in row 0
  const CsrMatrix zero =
      csr_from_triplets(2, {0, 0, 1, 1}, {0, 1, 0, 1}, {0.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(ilu0_factor(zero), ConstructionError);
}

TEST_CASE("ilu0 cuts outer iterations on convection-diffusion") {
  const CsrMatrix a = gen_convection_diffusion(12, 0.4);
  const DenseVector b = spmv(a, DenseVector(a.n, 1.0));
  SolveConfig cfg;
  cfg.maxiters = 300;
  cfg.restart = 30;

  const SolveOutcome plain = gmres_solve(a, b, cfg);
  const auto m = ilu0_build(ilu0_factor(a));
  const SolveOutcome pre =
      fgmres_solve(a, b, m.get(), DenseVector(a.n, 0.0), cfg);
  REQUIRE(pre.status == SolveStatus::converged);
  REQUIRE(plain.status == SolveStatus::converged);
  CHECK(outer_iterations(pre) < outer_iterations(plain));
}
