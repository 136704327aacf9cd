#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cdasim/grid.hpp"

namespace cdasim {

using Complex = std::complex<double>;

/// Fourier coefficients of a real, mean-free, periodic scalar field.
///
/// Convention: f(x) = sum_k c_k exp(i k.x) on [-pi, pi)^2, so that
/// (1/(2pi)^2) * integral |f|^2 dx = sum_k |c_k|^2. Coefficients are stored on
/// the full lattice in FFT order, row ky, column kx.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  int resolution() const { return grid_.resolution; }
  std::size_t size() const { return coeffs_.size(); }

  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }

  /// Access by signed wavenumber; both components must lie in the lattice.
  Complex& at(int kx, int ky);
  const Complex& at(int kx, int ky) const;

  /// Sets c(k) and its mirror c(-k) = conj(c(k)).
  void set_pair(int kx, int ky, Complex value);

  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }

  void pin_mean() { if (!coeffs_.empty()) coeffs_[0] = 0.0; }
  bool all_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  bool operator==(const SpectralField&) const = default;

 private:
  GridSpec grid_{};
  std::vector<Complex> coeffs_;
};

/// Largest |c(-k) - conj(c(k))| over wavenumbers whose mirror is representable.
double hermitian_defect(const SpectralField& f);

/// Largest coefficient magnitude.
double max_abs(const SpectralField& f);

/// Real samples on the uniform grid x_j = -pi + 2 pi j / N, row-major (y, x).
struct PhysicalField {
  GridSpec grid{};
  std::vector<double> values;

  PhysicalField() = default;
  explicit PhysicalField(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}

  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.resolution + ix]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.resolution + ix]; }
};

}  // namespace cdasim
