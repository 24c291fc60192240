#pragma once

#include <cstdint>

#include "gnp/csr.hpp"
#include "gnp/dense.hpp"
#include "gnp/rng.hpp"

namespace gnp {

// Cached Arnoldi/SVD factors driving spectral training-pair sampling.
// Built once per matrix; immutable afterwards.
struct SpectralSampler {
  DenseMatrix v;       // n x m, first m Arnoldi basis columns
  DenseMatrix vfull;   // n x (m+1)
  DenseMatrix wm;      // (m+1) x m, left singular vectors of Hbar
  DenseMatrix zm_sv;   // m x m, right singular vectors of Hbar
  DenseVector s;       // m singular values, descending
  std::size_t m = 0;
  std::size_t m_eff = 0;  // retained rank: s[j] >= s[0] * 1e-12
};

// Runs an unpreconditioned Arnoldi cycle from a seeded Gaussian start vector
// and factors the Hessenberg. Proceeds with fewer columns on early breakdown.
SpectralSampler build_spectral_sampler(const CsrMatrix& a, std::size_t m,
                                       std::uint64_t rng_seed);

struct TrainingPair {
  DenseVector x;
  DenseVector b;
};

// x = V * Zsv * diag(1/s) * eps with eps standard normal of length m_eff;
// b = A x. Targets concentrate near the bottom eigen-subspace of A.
TrainingPair sample_spectral_pair(const SpectralSampler& sampler,
                                  const CsrMatrix& a, Rng& rng);

// x standard normal of length n; b = A x.
TrainingPair sample_gaussian_pair(const CsrMatrix& a, Rng& rng);

struct TrainingBatch {
  DenseMatrix b;  // n x batch
  DenseMatrix x;  // n x batch
};

// First spectral_count columns are spectral pairs, the rest Gaussian.
TrainingBatch assemble_batch(const SpectralSampler& sampler, const CsrMatrix& a,
                             std::size_t batch, std::size_t spectral_count,
                             Rng& rng);

}  // namespace gnp
