#pragma once

#include <utility>
#include <vector>

#include "cdasim/spectral_field.hpp"

namespace cdasim {

// Differential, projection and norm operators on stream-function fields.
// Every operator returns a mean-free field (the k = 0 coefficient is pinned
// to zero) and preserves Hermitian symmetry.

SpectralField laplacian(const SpectralField& psi);

/// Divides by -|k|^2; the mean mode maps to zero.
SpectralField inverse_laplacian(const SpectralField& omega);

/// Velocity components of a stream function.
struct VelocityField {
  SpectralField u1;
  SpectralField u2;
};

/// u = (-d/dy psi, d/dx psi).
VelocityField perp_gradient(const SpectralField& psi);

/// i kx u1 + i ky u2, zero up to rounding for any perp_gradient output.
SpectralField divergence(const VelocityField& u);

/// Keeps 0 < |k| <= radius.
SpectralField project_low(const SpectralField& field, double radius);
/// Keeps |k| > radius.
SpectralField project_high(const SpectralField& field, double radius);

/// True when |k| <= radius, evaluated exactly on integers.
bool in_ball(long long k2, double radius);

/// Zeroes max(|kx|, |ky|) > dealias_fraction * N / 2.
SpectralField dealias(const SpectralField& field);
void dealias_inplace(SpectralField& field);

/// |u| = 2 pi sqrt(sum |k|^2 |psi_k|^2), the L2 norm of u = perp grad psi.
double velocity_l2_norm(const SpectralField& psi);
/// ||u|| = 2 pi sqrt(sum |k|^4 |psi_k|^2), the L2 norm of grad u.
double velocity_h1_norm(const SpectralField& psi);
/// V* norm 2 pi sqrt(sum |psi_k|^2) of the velocity field perp grad psi.
double velocity_dual_norm(const SpectralField& psi);

/// Velocity-level L2 inner product (u, v) for u = perp grad a, v = perp grad b.
double velocity_inner(const SpectralField& a, const SpectralField& b);

struct ShellSpectrum {
  struct Shell {
    int index;
    double energy;
  };
  std::vector<Shell> shells;

  double total() const;
};

/// Shell kappa collects (1/2)(2 pi)^2 |k|^2 |psi_k|^2 over kappa - 1/2 < |k| <= kappa + 1/2,
/// so the shells sum to the kinetic energy |u|^2 / 2.
ShellSpectrum energy_spectrum(const SpectralField& psi);

}  // namespace cdasim
