#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cdasim {

/// Wavenumber lattice of a doubly periodic box [-pi, pi)^2.
///
/// Storage index i in [0, resolution) maps to the integer wavenumber
/// i for i < resolution/2 and i - resolution otherwise, so the lattice is
/// {-resolution/2, ..., resolution/2 - 1} in each direction.
struct GridSpec {
  int resolution = 128;
  double domain_length = 2.0 * std::numbers::pi;
  double dealias_fraction = 2.0 / 3.0;

  /// Throws cdasim::Error unless resolution is even and >= 8 and the
  /// dealias fraction lies in (0, 1].
  void validate() const;

  /// Largest |kx| (and |ky|) retained by the square 2/3 mask.
  double dealias_cutoff() const { return dealias_fraction * resolution / 2.0; }

  int wavenumber(int index) const { return index < resolution / 2 ? index : index - resolution; }
  int index_of(int k) const { return k >= 0 ? k : k + resolution; }
  std::size_t size() const { return static_cast<std::size_t>(resolution) * resolution; }

  /// Physical coordinate of grid column/row j.
  double coordinate(int j) const { return -std::numbers::pi + domain_length * j / resolution; }

  bool operator==(const GridSpec&) const = default;
};

struct Wavenumber {
  int kx = 0;
  int ky = 0;
  std::int64_t norm2() const {
    return static_cast<std::int64_t>(kx) * kx + static_cast<std::int64_t>(ky) * ky;
  }
  bool operator==(const Wavenumber&) const = default;
};

}  // namespace cdasim
