#include "cdasim/spectral_ops.hpp"

#include <cmath>
#include <numbers>

#include "cdasim/error.hpp"
#include "cdasim/transform.hpp"

namespace cdasim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename Fn>
SpectralField scaled(const SpectralField& in, Fn factor) {
  const Lattice& lat = lattice(in.grid());
  SpectralField out(in.grid());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = factor(lat, i) * in[i];
  out.pin_mean();
  return out;
}

// Multiplies by the purely imaginary factor i*m without a full complex product.
inline Complex times_i(double m, const Complex& c) { return Complex(-m * c.imag(), m * c.real()); }

}  // namespace

SpectralField laplacian(const SpectralField& psi) {
  return scaled(psi, [](const Lattice& lat, std::size_t i) { return -lat.k2[i]; });
}

SpectralField inverse_laplacian(const SpectralField& omega) {
  return scaled(omega, [](const Lattice& lat, std::size_t i) { return i == 0 ? 0.0 : -1.0 / lat.k2[i]; });
}

VelocityField perp_gradient(const SpectralField& psi) {
  const Lattice& lat = lattice(psi.grid());
  VelocityField u{SpectralField(psi.grid()), SpectralField(psi.grid())};
  for (std::size_t i = 1; i < psi.size(); ++i) {
    u.u1[i] = times_i(-lat.ky[i], psi[i]);
    u.u2[i] = times_i(lat.kx[i], psi[i]);
  }
  return u;
}

SpectralField divergence(const VelocityField& u) {
  const Lattice& lat = lattice(u.u1.grid());
  SpectralField out(u.u1.grid());
  for (std::size_t i = 1; i < out.size(); ++i) {
    out[i] = times_i(lat.kx[i], u.u1[i]) + times_i(lat.ky[i], u.u2[i]);
  }
  return out;
}

bool in_ball(long long k2, double radius) {
  if (radius < 0.0) return false;
  return static_cast<double>(k2) <= radius * radius;
}

SpectralField project_low(const SpectralField& field, double radius) {
  return scaled(field, [radius](const Lattice& lat, std::size_t i) {
    return in_ball(static_cast<long long>(lat.k2[i]), radius) ? 1.0 : 0.0;
  });
}

SpectralField project_high(const SpectralField& field, double radius) {
  return scaled(field, [radius](const Lattice& lat, std::size_t i) {
    return in_ball(static_cast<long long>(lat.k2[i]), radius) ? 0.0 : 1.0;
  });
}

void dealias_inplace(SpectralField& field) {
  const Lattice& lat = lattice(field.grid());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!lat.retained[i]) field[i] = 0.0;
  }
  field.pin_mean();
}

SpectralField dealias(const SpectralField& field) {
  SpectralField out = field;
  dealias_inplace(out);
  return out;
}

double velocity_l2_norm(const SpectralField& psi) {
  const Lattice& lat = lattice(psi.grid());
  double s = 0.0;
  for (std::size_t i = 1; i < psi.size(); ++i) s += lat.k2[i] * std::norm(psi[i]);
  return kTwoPi * std::sqrt(s);
}

double velocity_h1_norm(const SpectralField& psi) {
  const Lattice& lat = lattice(psi.grid());
  double s = 0.0;
  for (std::size_t i = 1; i < psi.size(); ++i) s += lat.k2[i] * lat.k2[i] * std::norm(psi[i]);
  return kTwoPi * std::sqrt(s);
}

double velocity_dual_norm(const SpectralField& psi) {
  double s = 0.0;
  for (std::size_t i = 1; i < psi.size(); ++i) s += std::norm(psi[i]);
  return kTwoPi * std::sqrt(s);
}

double velocity_inner(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw Error("grid mismatch in inner product");
  const Lattice& lat = lattice(a.grid());
  double s = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) s += lat.k2[i] * (a[i] * std::conj(b[i])).real();
  return kTwoPi * kTwoPi * s;
}

double ShellSpectrum::total() const {
  double s = 0.0;
  for (const auto& sh : shells) s += sh.energy;
  return s;
}

ShellSpectrum energy_spectrum(const SpectralField& psi) {
  const Lattice& lat = lattice(psi.grid());
  const int h = psi.resolution() / 2;
  const int max_shell = static_cast<int>(std::lround(std::sqrt(2.0) * h));
  std::vector<double> e(static_cast<std::size_t>(max_shell) + 1, 0.0);
  for (std::size_t i = 1; i < psi.size(); ++i) {
    // |k| is never a half-integer, so rounding assigns the shell exactly.
    const int kappa = static_cast<int>(std::lround(std::sqrt(lat.k2[i])));
    e[static_cast<std::size_t>(kappa)] += 0.5 * kTwoPi * kTwoPi * lat.k2[i] * std::norm(psi[i]);
  }
  ShellSpectrum spec;
  for (int k = 1; k <= max_shell; ++k) spec.shells.push_back({k, e[static_cast<std::size_t>(k)]});
  return spec;
}

}  // namespace cdasim
