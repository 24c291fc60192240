#include "gnp/gen.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "gnp/rng.hpp"

namespace gnp {

CsrMatrix gen_convection_diffusion(std::size_t grid, double convection) {
  if (grid < 2) throw std::invalid_argument("gen: grid must be >= 2");
  if (std::abs(convection) > 1.0)
    throw std::invalid_argument("gen: convection must lie in [-1, 1]");
  const std::size_t n = grid * grid;
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  rows.reserve(5 * n);
  cols.reserve(5 * n);
  vals.reserve(5 * n);
  auto idx = [grid](std::size_t ix, std::size_t iy) { return iy * grid + ix; };
  for (std::size_t iy = 0; iy < grid; ++iy) {
    for (std::size_t ix = 0; ix < grid; ++ix) {
      const std::size_t row = idx(ix, iy);
      auto push = [&](std::size_t col, double v) {
        rows.push_back(row);
        cols.push_back(col);
        vals.push_back(v);
      };
      push(row, 4.0);
      if (ix > 0) push(idx(ix - 1, iy), -1.0 - convection);
      if (ix + 1 < grid) push(idx(ix + 1, iy), -1.0 + convection);
      if (iy > 0) push(idx(ix, iy - 1), -1.0);
      if (iy + 1 < grid) push(idx(ix, iy + 1), -1.0);
    }
  }
  return csr_from_triplets(n, std::move(rows), std::move(cols), std::move(vals));
}

CsrMatrix gen_random_nonsymmetric(std::size_t n, std::size_t offdiag_per_row,
                                  double dominance, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen: n must be >= 1");
  if (offdiag_per_row >= n)
    throw std::invalid_argument("gen: too many off-diagonals per row");
  Rng rng(seed);
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> used{i};
    double abs_sum = 0.0;
    for (std::size_t k = 0; k < offdiag_per_row; ++k) {
      std::size_t j;
      do {
        j = static_cast<std::size_t>(rng.uniform() * n);
        if (j >= n) j = n - 1;
      } while (used.count(j));
      used.insert(j);
      const double v = rng.uniform_symmetric(1.0);
      abs_sum += std::abs(v);
      rows.push_back(i);
      cols.push_back(j);
      vals.push_back(v);
    }
    rows.push_back(i);
    cols.push_back(i);
    vals.push_back(dominance * abs_sum + 0.1 + 0.1 * rng.uniform());
  }
  return csr_from_triplets(n, std::move(rows), std::move(cols), std::move(vals));
}

}  // namespace gnp
