#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "gnp/dense.hpp"

namespace gnp {

// Seeded Gaussian source. mt19937_64 is fully specified by the standard and
// Box-Muller is done by hand, so streams are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return (gen_() >> 11) * 0x1.0p-53;
  }

  // uniform in [-bound, bound]
  double uniform_symmetric(double bound) {
    return (2.0 * uniform() - 1.0) * bound;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  DenseVector gaussian_vector(std::size_t n) {
    DenseVector v(n);
    for (double& x : v) x = gaussian();
    return v;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gnp
