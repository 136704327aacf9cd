#pragma once

#include <cmath>
#include <random>

#include "cdasim/spectral_field.hpp"
#include "cdasim/transform.hpp"

namespace testing {

/// Seeded random Hermitian, mean-free field; amplitudes fall off like 1/(1+|k|^2).
/// With dealiased = true only modes inside the 2/3 mask are populated.
inline cdasim::SpectralField random_field(const cdasim::GridSpec& grid, unsigned seed, bool dealiased = true,
                                        double scale = 1.0) {
  cdasim::SpectralField f(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = grid.resolution;
  const cdasim::Lattice& lat = cdasim::lattice(grid);
  for (int ky = -n / 2 + 1; ky < n / 2; ++ky) {
    for (int kx = 0; kx < n / 2; ++kx) {
      if (kx == 0 && ky <= 0) continue;
      const std::size_t i = static_cast<std::size_t>(grid.index_of(ky)) * n + grid.index_of(kx);
      if (dealiased && !lat.retained[i]) continue;
      const double amp = scale / (1.0 + kx * kx + ky * ky);
      f.set_pair(kx, ky, amp * cdasim::Complex(normal(rng), normal(rng)));
    }
  }
  return f;
}

inline double rel_diff(const cdasim::SpectralField& a, const cdasim::SpectralField& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace testing
