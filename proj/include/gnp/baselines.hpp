#pragma once

#include <memory>
#include <stdexcept>

#include "gnp/csr.hpp"
#include "gnp/krylov.hpp"

namespace gnp {

// apply(v) = v ./ diag(A). Diagonal entries below 1e-300 in magnitude are
// replaced by 1.0, so construction never fails; a useless diagonal shows up
// later as solve divergence.
std::unique_ptr<FlexibleOperator> jacobi_build(const CsrMatrix& a);

// apply(v) runs unrestarted GMRES on A with right-hand side v and a zero
// initial guess, stopped at inner_iters steps or inner_tol relative residual.
// The variable stopping point makes this operator nonlinear in v; it is only
// valid under FGMRES.
std::unique_ptr<FlexibleOperator> inner_gmres_build(const CsrMatrix& a,
                                                    std::size_t inner_iters = 10,
                                                    double inner_tol = 1e-6);

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Combined L\U factors in the sparsity pattern of A; the unit lower diagonal
// is implicit.
struct Ilu0Factors {
  CsrMatrix lu;
  std::vector<std::size_t> diag_pos;  // index of the diagonal in each row
};

// ILU(0): no fill-in outside the pattern of A. Throws ConstructionError on a
// structurally missing or zero pivot.
Ilu0Factors ilu0_factor(const CsrMatrix& a);
std::unique_ptr<FlexibleOperator> ilu0_build(Ilu0Factors f);

}  // namespace gnp
