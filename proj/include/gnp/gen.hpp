#pragma once

#include <cstdint>

#include "gnp/csr.hpp"

namespace gnp {

// 2D convection-diffusion five-point stencil on a grid x grid mesh with
// Dirichlet boundaries. convection in [-1, 1] skews the east/west couplings
// (-1 - c and -1 + c around a diagonal of 4), making the matrix nonsymmetric.
CsrMatrix gen_convection_diffusion(std::size_t grid, double convection);

// Random sparse nonsymmetric matrix with a perturbed dominant diagonal:
// offdiag_per_row uniform [-1,1] entries per row, diagonal set to
// dominance * (row abs sum) + a small positive perturbation.
CsrMatrix gen_random_nonsymmetric(std::size_t n, std::size_t offdiag_per_row,
                                  double dominance, std::uint64_t seed);

}  // namespace gnp
