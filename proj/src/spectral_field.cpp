#include "cdasim/spectral_field.hpp"

#include <algorithm>
#include <cmath>

#include "cdasim/error.hpp"

namespace cdasim {

void GridSpec::validate() const {
  if (resolution < 8 || resolution % 2 != 0) {
    throw Error("grid resolution must be even and >= 8, got " + std::to_string(resolution));
  }
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) {
    throw Error("dealias fraction must lie in (0, 1]");
  }
  if (!(domain_length > 0.0)) throw Error("domain length must be positive");
}

SpectralField::SpectralField(const GridSpec& grid) : grid_(grid), coeffs_(grid.size()) {
  grid_.validate();
}

Complex& SpectralField::at(int kx, int ky) {
  const int n = grid_.resolution;
  return coeffs_[static_cast<std::size_t>(grid_.index_of(ky)) * n + grid_.index_of(kx)];
}

const Complex& SpectralField::at(int kx, int ky) const {
  const int n = grid_.resolution;
  return coeffs_[static_cast<std::size_t>(grid_.index_of(ky)) * n + grid_.index_of(kx)];
}

void SpectralField::set_pair(int kx, int ky, Complex value) {
  at(kx, ky) = value;
  const int h = grid_.resolution / 2;
  if (-kx < h && -ky < h) at(-kx, -ky) = std::conj(value);
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!(other.grid_ == grid_)) throw Error("grid mismatch in field addition");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!(other.grid_ == grid_)) throw Error("grid mismatch in field subtraction");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

double hermitian_defect(const SpectralField& f) {
  const int n = f.resolution();
  const int h = n / 2;
  double worst = 0.0;
  for (int ky = -h + 1; ky < h; ++ky) {
    for (int kx = -h + 1; kx < h; ++kx) {
      worst = std::max(worst, std::abs(f.at(-kx, -ky) - std::conj(f.at(kx, ky))));
    }
  }
  return worst;
}

double max_abs(const SpectralField& f) {
  double m = 0.0;
  for (const auto& c : f.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace cdasim
