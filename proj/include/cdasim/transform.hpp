#pragma once

#include <memory>
#include <vector>

#include "cdasim/spectral_field.hpp"

namespace cdasim {

/// FFTW-backed real <-> spectral transforms for one resolution.
///
/// Forward: c_k = N^-2 sum_j f(x_j) exp(-i k.x_j) with x_j = -pi + 2 pi j / N.
/// The r2c output is expanded to the full lattice by exact conjugation, so
/// every forward result is Hermitian to the last bit. Instances hold scratch
/// buffers and are not shareable between threads; use fourier() to get the
/// calling thread's instance.
class FourierTransform {
 public:
  explicit FourierTransform(int resolution);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  int resolution() const { return n_; }

  /// physical: N*N reals (row y, column x). spectral: N*N coefficients.
  void forward(const double* physical, Complex* spectral);
  /// Reads only the kx >= 0 half; assumes Hermitian input.
  void inverse(const Complex* spectral, double* physical);
  /// Full complex synthesis, no symmetry assumed. Diagnostic path.
  void inverse_complex(const Complex* spectral, Complex* physical);

 private:
  struct Plans;
  int n_;
  std::unique_ptr<Plans> plans_;
};

/// The calling thread's transform for this resolution.
FourierTransform& fourier(int resolution);

SpectralField forward_transform(const PhysicalField& physical);
PhysicalField inverse_transform(const SpectralField& field);
std::vector<Complex> inverse_transform_complex(const SpectralField& field);

/// Per-grid wavenumber tables shared by the spectral operators.
struct Lattice {
  std::vector<int> kx;
  std::vector<int> ky;
  std::vector<double> k2;
  std::vector<unsigned char> retained;  // inside the dealias mask
};

/// The calling thread's lattice tables for this grid.
const Lattice& lattice(const GridSpec& grid);

}  // namespace cdasim
