#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gnp/csr.hpp"
#include "gnp/dense.hpp"

namespace gnp {

// Preconditioner operator M applied as z = M(v). M may be nonlinear; FGMRES
// only requires that it is deterministic for a fixed instance.
class FlexibleOperator {
 public:
  virtual ~FlexibleOperator() = default;
  virtual DenseVector apply(const DenseVector& v) const = 0;
  virtual std::string name() const = 0;
};

struct ArnoldiFactorization {
  DenseMatrix v;     // n x (k+1), orthonormal columns
  DenseMatrix hbar;  // (k+1) x k, upper Hessenberg
  std::size_t steps = 0;
  bool breakdown = false;
};

struct SolveConfig {
  double rtol = 1e-8;
  std::size_t maxiters = 100;  // total outer Arnoldi steps across restarts
  std::size_t restart = 10;
  std::optional<double> timeout_secs;
};

struct HistoryEntry {
  std::size_t iteration;
  double relres;
  double elapsed_secs;
};

using ConvergenceHistory = std::vector<HistoryEntry>;

enum class SolveStatus {
  converged,
  maxiters,
  timeout,
  solution_failure,
  breakdown_exact,
};

std::string to_string(SolveStatus s);

struct SolveOutcome {
  DenseVector x;
  ConvergenceHistory history;
  SolveStatus status = SolveStatus::maxiters;
};

// Runs m Arnoldi steps from r0 with modified Gram-Schmidt (one
// re-orthogonalization pass when the norm drops below 1/sqrt(2)). With a
// preconditioner, z_j = M(v_j) and the relation A Z = V Hbar holds; without
// one, Z's columns equal V's first columns and A V_m = V_{m+1} Hbar.
// Stops early with the breakdown flag when h_{j+1,j} <= 1e-14 * ||A z_j||.
struct ArnoldiResult {
  ArnoldiFactorization fact;
  DenseMatrix z;  // n x completed steps
};
ArnoldiResult arnoldi_cycle(const CsrMatrix& a, const DenseVector& r0,
                            std::size_t m, const FlexibleOperator* precond);

// Minimizes ||beta*e1 - Hbar*y||_2 by Givens rotations. singular is set when
// a diagonal of the triangular factor is exactly zero.
struct LstsqResult {
  DenseVector y;
  double tracked_res = 0.0;
  bool singular = false;
};
LstsqResult hessenberg_lstsq(const DenseMatrix& hbar, double beta);

SolveOutcome fgmres_solve(const CsrMatrix& a, const DenseVector& b,
                          const FlexibleOperator* precond,
                          const DenseVector& x0, const SolveConfig& cfg);

SolveOutcome gmres_solve(const CsrMatrix& a, const DenseVector& b,
                         const SolveConfig& cfg);

// Diagnostic for the projection identity r_m = r0 - Q Q^T r0 where Q is the
// thin orthonormal factor of A*Z. Returns ||r_m - (r0 - Q Q^T r0)||_2, or
// +inf when A*Z is numerically rank deficient.
double residual_projection_check(const CsrMatrix& a, const DenseMatrix& z,
                                 const DenseVector& r0, const DenseVector& rm);

}  // namespace gnp
