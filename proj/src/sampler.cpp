#include "gnp/sampler.hpp"

#include <stdexcept>

#include "gnp/krylov.hpp"
#include "gnp/svd.hpp"

namespace gnp {

SpectralSampler build_spectral_sampler(const CsrMatrix& a, std::size_t m,
                                       std::uint64_t rng_seed) {
  if (a.n < 2) throw std::invalid_argument("spectral sampler: n must be >= 2");
  if (m < 1) throw std::invalid_argument("spectral sampler: m must be >= 1");

  Rng rng(rng_seed);
  const DenseVector start = rng.gaussian_vector(a.n);
  const ArnoldiResult ar = arnoldi_cycle(a, start, m, nullptr);
  const std::size_t k = ar.fact.steps;  // may be < m on breakdown

  const SvdResult svd = jacobi_svd(ar.fact.hbar);

  SpectralSampler out;
  out.m = k;
  out.vfull = ar.fact.v;
  out.v = DenseMatrix(a.n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < a.n; ++i) out.v(i, j) = ar.fact.v(i, j);
  out.wm = svd.u;
  out.zm_sv = svd.v;
  out.s = svd.s;
  out.m_eff = 0;
  const double floor = svd.s.empty() ? 0.0 : svd.s[0] * 1e-12;
  for (double sv : svd.s) {
    if (sv >= floor && sv > 0.0) ++out.m_eff;
  }
  if (out.m_eff == 0)
    throw std::runtime_error("spectral sampler: Hessenberg is numerically zero");
  return out;
}

TrainingPair sample_spectral_pair(const SpectralSampler& sampler,
                                  const CsrMatrix& a, Rng& rng) {
  // coef = Zsv[:, :m_eff] * diag(1/s) * eps, then x = V * coef
  DenseVector coef(sampler.m, 0.0);
  for (std::size_t j = 0; j < sampler.m_eff; ++j) {
    const double scaled = rng.gaussian() / sampler.s[j];
    for (std::size_t i = 0; i < sampler.m; ++i)
      coef[i] += sampler.zm_sv(i, j) * scaled;
  }
  TrainingPair p;
  p.x.assign(a.n, 0.0);
  for (std::size_t j = 0; j < sampler.m; ++j) {
    const double cj = coef[j];
    const double* vj = sampler.v.col(j);
    for (std::size_t i = 0; i < a.n; ++i) p.x[i] += vj[i] * cj;
  }
  p.b = spmv(a, p.x);
  return p;
}

TrainingPair sample_gaussian_pair(const CsrMatrix& a, Rng& rng) {
  TrainingPair p;
  p.x = rng.gaussian_vector(a.n);
  p.b = spmv(a, p.x);
  return p;
}

TrainingBatch assemble_batch(const SpectralSampler& sampler, const CsrMatrix& a,
                             std::size_t batch, std::size_t spectral_count,
                             Rng& rng) {
  if (batch == 0) throw std::invalid_argument("assemble_batch: empty batch");
  if (spectral_count > batch)
    throw std::invalid_argument("assemble_batch: spectral_count > batch");
  TrainingBatch out{DenseMatrix(a.n, batch), DenseMatrix(a.n, batch)};
  for (std::size_t k = 0; k < batch; ++k) {
    const TrainingPair p = k < spectral_count
                               ? sample_spectral_pair(sampler, a, rng)
                               : sample_gaussian_pair(a, rng);
    out.b.set_col(k, p.b);
    out.x.set_col(k, p.x);
  }
  return out;
}

}  // namespace gnp
