#include "gnp/krylov.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gnp {

namespace {

constexpr double kBreakdownFactor = 1e-14;
constexpr double kReorthThreshold = 0.70710678118654752440;  // 1/sqrt(2)

// One restart cycle of the (flexible) Arnoldi process, advanced step by step
// so the solver can record history and check budgets per outer iteration.
class ArnoldiProcess {
 public:
  ArnoldiProcess(const CsrMatrix& a, const DenseVector& r0, std::size_t m,
                 const FlexibleOperator* precond)
      : a_(a), precond_(precond), m_(m), v_(a.n, m + 1), hbar_(m + 1, m),
        z_(a.n, m) {
    const double beta = norm2(r0);
    if (beta == 0.0) throw std::invalid_argument("arnoldi: zero start vector");
    for (std::size_t i = 0; i < a.n; ++i) v_(i, 0) = r0[i] / beta;
  }

  // Performs step j+1. Returns false on breakdown (h_{j+1,j} ~ 0); the step
  // still counts as completed.
  bool step() {
    const std::size_t j = steps_;
    DenseVector vj = v_.col_copy(j);
    DenseVector zj = precond_ ? precond_->apply(vj) : vj;
    if (zj.size() != a_.n)
      throw std::invalid_argument("preconditioner output length mismatch");
    z_.set_col(j, zj);
    DenseVector w = spmv(a_, zj);
    const double wnorm0 = norm2(w);

    // modified Gram-Schmidt, re-orthogonalize once on severe cancellation
    for (std::size_t i = 0; i <= j; ++i) {
      double h = 0.0;
      for (std::size_t r = 0; r < a_.n; ++r) h += w[r] * v_(r, i);
      hbar_(i, j) = h;
      for (std::size_t r = 0; r < a_.n; ++r) w[r] -= h * v_(r, i);
    }
    double wnorm = norm2(w);
    if (wnorm < kReorthThreshold * wnorm0) {
      for (std::size_t i = 0; i <= j; ++i) {
        double c = 0.0;
        for (std::size_t r = 0; r < a_.n; ++r) c += w[r] * v_(r, i);
        hbar_(i, j) += c;
        for (std::size_t r = 0; r < a_.n; ++r) w[r] -= c * v_(r, i);
      }
      wnorm = norm2(w);
    }
    hbar_(j + 1, j) = wnorm;
    ++steps_;
    if (wnorm <= kBreakdownFactor * wnorm0) {
      breakdown_ = true;
      return false;
    }
    for (std::size_t r = 0; r < a_.n; ++r) v_(r, j + 1) = w[r] / wnorm;
    return true;
  }

  std::size_t steps() const { return steps_; }
  bool breakdown() const { return breakdown_; }

  // Factorization truncated to the completed steps.
  ArnoldiResult take() const {
    const std::size_t k = steps_;
    ArnoldiResult out;
    out.fact.steps = k;
    out.fact.breakdown = breakdown_;
    out.fact.v = DenseMatrix(a_.n, k + 1);
    out.fact.hbar = DenseMatrix(k + 1, k);
    out.z = DenseMatrix(a_.n, k);
    for (std::size_t j = 0; j <= k; ++j)
      for (std::size_t i = 0; i < a_.n; ++i) out.fact.v(i, j) = v_(i, j);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i <= k; ++i) out.fact.hbar(i, j) = hbar_(i, j);
      for (std::size_t i = 0; i < a_.n; ++i) out.z(i, j) = z_(i, j);
    }
    return out;
  }

  // Leading (k+1) x k block of Hbar for the completed steps.
  DenseMatrix hbar_block(std::size_t k) const {
    DenseMatrix h(k + 1, k);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i <= k; ++i) h(i, j) = hbar_(i, j);
    return h;
  }

  // x += Z[:, :k] * y
  void accumulate_solution(const DenseVector& y, DenseVector& x) const {
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double yj = y[j];
      for (std::size_t i = 0; i < a_.n; ++i) x[i] += z_(i, j) * yj;
    }
  }

 private:
  const CsrMatrix& a_;
  const FlexibleOperator* precond_;
  std::size_t m_;
  std::size_t steps_ = 0;
  bool breakdown_ = false;
  DenseMatrix v_, hbar_, z_;
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::maxiters: return "maxiters";
    case SolveStatus::timeout: return "timeout";
    case SolveStatus::solution_failure: return "solution_failure";
    case SolveStatus::breakdown_exact: return "breakdown_exact";
  }
  return "unknown";
}

ArnoldiResult arnoldi_cycle(const CsrMatrix& a, const DenseVector& r0,
                            std::size_t m, const FlexibleOperator* precond) {
  if (m < 1) throw std::invalid_argument("arnoldi: m must be >= 1");
  ArnoldiProcess proc(a, r0, m, precond);
  for (std::size_t j = 0; j < m; ++j) {
    if (!proc.step()) break;
  }
  return proc.take();
}

LstsqResult hessenberg_lstsq(const DenseMatrix& hbar, double beta) {
  const std::size_t k = hbar.cols();
  if (k < 1 || hbar.rows() != k + 1)
    throw std::invalid_argument("hessenberg_lstsq: expected (k+1) x k");

  DenseMatrix r = hbar;
  DenseVector g(k + 1, 0.0);
  g[0] = beta;

  for (std::size_t j = 0; j < k; ++j) {
    const double a = r(j, j), b = r(j + 1, j);
    const double denom = std::hypot(a, b);
    const double c = denom == 0.0 ? 1.0 : a / denom;
    const double s = denom == 0.0 ? 0.0 : b / denom;
    for (std::size_t col = j; col < k; ++col) {
      const double t1 = r(j, col), t2 = r(j + 1, col);
      r(j, col) = c * t1 + s * t2;
      r(j + 1, col) = -s * t1 + c * t2;
    }
    const double t1 = g[j], t2 = g[j + 1];
    g[j] = c * t1 + s * t2;
    g[j + 1] = -s * t1 + c * t2;
  }

  LstsqResult out;
  out.y.assign(k, 0.0);
  out.tracked_res = std::abs(g[k]);
  for (std::size_t jj = k; jj-- > 0;) {
    if (r(jj, jj) == 0.0) {
      out.singular = true;
      return out;
    }
    double s = g[jj];
    for (std::size_t col = jj + 1; col < k; ++col) s -= r(jj, col) * out.y[col];
    out.y[jj] = s / r(jj, jj);
  }
  return out;
}

SolveOutcome fgmres_solve(const CsrMatrix& a, const DenseVector& b,
                          const FlexibleOperator* precond,
                          const DenseVector& x0, const SolveConfig& cfg) {
  if (b.size() != a.n || x0.size() != a.n)
    throw std::invalid_argument("fgmres: dimension mismatch");
  const double bnorm = norm2(b);
  if (bnorm == 0.0) throw std::invalid_argument("fgmres: zero right-hand side");
  if (cfg.restart < 1) throw std::invalid_argument("fgmres: restart must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  SolveOutcome out;
  out.x = x0;

  auto true_relres = [&] {
    DenseVector r = b;
    const DenseVector ax = spmv(a, out.x);
    axpy(-1.0, ax, r);
    return norm2(r) / bnorm;
  };

  double current = true_relres();
  out.history.push_back({0, current, 0.0});
  if (current <= cfg.rtol) {
    out.status = SolveStatus::converged;
    return out;
  }

  std::size_t iter = 0;
  while (iter < cfg.maxiters) {
    DenseVector r0 = b;
    const DenseVector ax = spmv(a, out.x);
    axpy(-1.0, ax, r0);
    const double beta = norm2(r0);

    const std::size_t cycle = std::min(cfg.restart, cfg.maxiters - iter);
    ArnoldiProcess proc(a, r0, cycle, precond);

    bool budget_hit = false;
    SolveStatus budget_status = SolveStatus::maxiters;
    double tracked_rel = beta / bnorm;
    for (std::size_t j = 0; j < cycle; ++j) {
      const bool ok = proc.step();
      ++iter;
      const auto lstsq = hessenberg_lstsq(proc.hbar_block(proc.steps()), beta);
      tracked_rel = lstsq.tracked_res / bnorm;
      out.history.push_back({iter, tracked_rel, elapsed()});
      if (!ok || tracked_rel <= cfg.rtol) break;
      if (cfg.timeout_secs && elapsed() >= *cfg.timeout_secs) {
        budget_hit = true;
        budget_status = SolveStatus::timeout;
        break;
      }
      if (iter >= cfg.maxiters) {
        budget_hit = true;
        budget_status = SolveStatus::maxiters;
        break;
      }
    }

    const std::size_t k = proc.steps();
    const auto lstsq = hessenberg_lstsq(proc.hbar_block(k), beta);
    if (lstsq.singular) {
      out.status = SolveStatus::solution_failure;
      return out;
    }
    proc.accumulate_solution(lstsq.y, out.x);
    tracked_rel = lstsq.tracked_res / bnorm;

    current = true_relres();
    out.history.back() = {iter, current, elapsed()};

    // the tracked residual from the Hessenberg QR disagreeing with the
    // actual residual is the solution-failure mode
    if (current > 10.0 * tracked_rel && current - tracked_rel > 1e-10) {
      out.status = SolveStatus::solution_failure;
      return out;
    }
    if (current <= cfg.rtol) {
      out.status = SolveStatus::converged;
      return out;
    }
    if (proc.breakdown()) {
      out.status = SolveStatus::breakdown_exact;
      return out;
    }
    if (budget_hit) {
      out.status = budget_status;
      return out;
    }
    if (cfg.timeout_secs && elapsed() >= *cfg.timeout_secs) {
      out.status = SolveStatus::timeout;
      return out;
    }
  }
  out.status = SolveStatus::maxiters;
  return out;
}

SolveOutcome gmres_solve(const CsrMatrix& a, const DenseVector& b,
                         const SolveConfig& cfg) {
  return fgmres_solve(a, b, nullptr, DenseVector(a.n, 0.0), cfg);
}

double residual_projection_check(const CsrMatrix& a, const DenseMatrix& z,
                                 const DenseVector& r0, const DenseVector& rm) {
  DenseMatrix q = spmm(a, z);
  const std::size_t m = q.cols();
  for (std::size_t j = 0; j < m; ++j) {
    double* qj = q.col(j);
    DenseVector col(qj, qj + q.rows());
    const double norm0 = norm2(col);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double* qi = q.col(i);
        double h = 0.0;
        for (std::size_t r = 0; r < q.rows(); ++r) h += col[r] * qi[r];
        for (std::size_t r = 0; r < q.rows(); ++r) col[r] -= h * qi[r];
      }
    }
    const double norm = norm2(col);
    if (norm <= 1e-12 * norm0 || norm0 == 0.0)
      return std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < q.rows(); ++r) qj[r] = col[r] / norm;
  }
  // proj = r0 - Q Q^T r0
  DenseVector proj = r0;
  for (std::size_t j = 0; j < m; ++j) {
    const double* qj = q.col(j);
    double h = 0.0;
    for (std::size_t r = 0; r < q.rows(); ++r) h += r0[r] * qj[r];
    for (std::size_t r = 0; r < q.rows(); ++r) proj[r] -= h * qj[r];
  }
  DenseVector diff = rm;
  axpy(-1.0, proj, diff);
  return norm2(diff);
}

}  // namespace gnp
