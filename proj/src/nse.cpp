#include "cdasim/nse.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "cdasim/error.hpp"
#include "cdasim/spectral_ops.hpp"
#include "cdasim/transform.hpp"

namespace cdasim {

namespace {

struct NonlinearScratch {
  std::vector<Complex> spec[4];
  std::vector<double> phys[4];
  std::vector<double> product;
};

NonlinearScratch& scratch_for(int n) {
  thread_local std::vector<std::pair<int, NonlinearScratch>> cache;
  for (auto& [res, s] : cache) {
    if (res == n) return s;
  }
  const std::size_t size = static_cast<std::size_t>(n) * n;
  NonlinearScratch s;
  for (auto& v : s.spec) v.resize(size);
  for (auto& v : s.phys) v.resize(size);
  s.product.resize(size);
  cache.emplace_back(n, std::move(s));
  return cache.back().second;
}

void nonlinear_into(const SpectralField& psi, SpectralField& out) {
  const GridSpec& grid = psi.grid();
  const Lattice& lat = lattice(grid);
  const int n = grid.resolution;
  NonlinearScratch& s = scratch_for(n);
  FourierTransform& ft = fourier(n);
  auto& u1 = s.spec[0];
  auto& u2 = s.spec[1];
  auto& wx = s.spec[2];
  auto& wy = s.spec[3];
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Complex c = (i != 0 && lat.retained[i]) ? psi[i] : Complex(0.0);
    const double kx = lat.kx[i];
    const double ky = lat.ky[i];
    const Complex w = -lat.k2[i] * c;
    u1[i] = Complex(ky * c.imag(), -ky * c.real());  // -i ky psi
    u2[i] = Complex(-kx * c.imag(), kx * c.real());  // i kx psi
    wx[i] = Complex(-kx * w.imag(), kx * w.real());  // i kx omega
    wy[i] = Complex(-ky * w.imag(), ky * w.real());  // i ky omega
  }
  for (int c = 0; c < 4; ++c) ft.inverse(s.spec[c].data(), s.phys[c].data());
  const std::size_t size = s.product.size();
  for (std::size_t j = 0; j < size; ++j) {
    s.product[j] = s.phys[0][j] * s.phys[2][j] + s.phys[1][j] * s.phys[3][j];
  }
  ft.forward(s.product.data(), out.coeffs().data());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (i != 0 && lat.retained[i]) ? out[i] / lat.k2[i] : Complex(0.0);
  }
}

bool has_forcing(const SolverConfig& cfg) { return cfg.forcing.size() != 0; }

}  // namespace

void SolverConfig::validate() const {
  grid.validate();
  if (!(nu > 0.0)) throw Error("viscosity nu must be positive");
  if (!(dt > 0.0)) throw Error("time step dt must be positive");
  if (has_forcing(*this) && !(forcing.grid() == grid)) throw Error("forcing grid does not match solver grid");
}

SpectralField make_band_forcing(const GridSpec& grid, double band_lo2, double band_hi2, double grashof_target,
                                double nu, std::uint64_t seed) {
  grid.validate();
  if (!(band_lo2 <= band_hi2)) throw Error("forcing band must satisfy band_lo <= band_hi");
  if (grashof_target < 0.0) throw Error("Grashof target must be nonnegative");
  if (!(nu > 0.0)) throw Error("viscosity nu must be positive");
  SpectralField f(grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const int h = grid.resolution / 2;
  const double cutoff = grid.dealias_cutoff();
  int modes = 0;
  for (int ky = -h + 1; ky < h; ++ky) {
    for (int kx = 0; kx < h; ++kx) {
      if (kx == 0 && ky <= 0) continue;  // one representative per conjugate pair
      const double k2 = static_cast<double>(Wavenumber{kx, ky}.norm2());
      if (k2 < band_lo2 || k2 > band_hi2) continue;
      if (kx > cutoff || std::abs(ky) > cutoff) continue;
      f.set_pair(kx, ky, std::polar(1.0, phase(rng)));
      ++modes;
    }
  }
  if (modes == 0) throw Error("no modes in forcing band");
  const double norm = velocity_l2_norm(f);
  f *= grashof_target * nu * nu / norm;
  return f;
}

double grashof(const SpectralField& forcing, double nu) {
  if (!(nu > 0.0)) throw Error("viscosity nu must be positive");
  if (forcing.size() == 0) return 0.0;
  return velocity_l2_norm(forcing) / (nu * nu);
}

SpectralField nonlinear_term(const SpectralField& psi) {
  SpectralField out(psi.grid());
  nonlinear_into(psi, out);
  return out;
}

EnergyReport energy_report(const FlowState& state, const SolverConfig& cfg) {
  EnergyReport r;
  r.time = state.time;
  const double l2 = velocity_l2_norm(state.psi);
  const double h1 = velocity_h1_norm(state.psi);
  r.energy = 0.5 * l2 * l2;
  r.enstrophy = 0.5 * h1 * h1;
  if (has_forcing(cfg)) {
    const double f_l2 = velocity_l2_norm(cfg.forcing);
    r.grashof = grashof(cfg.forcing, cfg.nu);
    r.shape_factor = f_l2 > 0.0 ? velocity_dual_norm(cfg.forcing) / f_l2 : 0.0;
  }
  r.rho0 = cfg.nu * r.shape_factor * r.grashof;
  r.rho1 = cfg.nu * r.grashof;
  return r;
}

Integrator::Integrator(SolverConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const Lattice& lat = lattice(cfg_.grid);
  factor_.resize(cfg_.grid.size());
  for (std::size_t i = 0; i < factor_.size(); ++i) {
    factor_[i] = (i != 0 && lat.retained[i]) ? std::exp(-cfg_.nu * lat.k2[i] * cfg_.dt) : 0.0;
  }
  const double rho0 = energy_report(FlowState{SpectralField(cfg_.grid), 0.0}, cfg_).rho0;
  energy_ceiling_ = rho0 > 0.0 ? 1e6 * rho0 * rho0 : std::numeric_limits<double>::infinity();
}

SpectralField Integrator::predict(const SpectralField& psi) const {
  if (!(psi.grid() == cfg_.grid)) throw Error("state grid does not match solver grid");
  SpectralField out(cfg_.grid);
  nonlinear_into(psi, out);
  const double dt = cfg_.dt;
  const bool forced = has_forcing(cfg_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Complex rhs = out[i];
    if (forced) rhs += cfg_.forcing[i];
    out[i] = factor_[i] * (psi[i] + dt * rhs);
  }
  out.pin_mean();
  return out;
}

void Integrator::check_bounded(const SpectralField& psi, double time, const std::string& label) const {
  const std::string who = label.empty() ? std::string() : " in " + label;
  if (!psi.all_finite()) {
    throw BlowUpError("solution blow-up / instability" + who + ": non-finite coefficients at t = " +
                          std::to_string(time),
                      label, std::make_shared<const SpectralField>(psi), time);
  }
  const double l2 = velocity_l2_norm(psi);
  if (l2 * l2 > energy_ceiling_) {
    throw BlowUpError("solution blow-up / instability" + who + ": |u|^2 = " + std::to_string(l2 * l2) +
                          " exceeds 1e6 rho0^2 at t = " + std::to_string(time),
                      label, std::make_shared<const SpectralField>(psi), time);
  }
}

FlowState Integrator::step(const FlowState& state) const {
  FlowState next{predict(state.psi), state.time + cfg_.dt};
  check_bounded(next.psi, next.time);
  return next;
}

FlowState step_nse(const FlowState& state, const SolverConfig& cfg) { return Integrator(cfg).step(state); }

long long steps_for(double span, double dt) {
  if (span <= 0.0) return 0;
  return static_cast<long long>(std::ceil(span / dt - 1e-9));
}

FlowState spinup(const SolverConfig& cfg, double t_end, FlowState initial, const EnergyCallback& on_checkpoint,
                 int checkpoint_every) {
  if (t_end < 0.0) throw Error("spin-up end time must be nonnegative");
  if (checkpoint_every < 1) throw Error("checkpoint interval must be positive");
  const Integrator integ(cfg);
  if (initial.psi.size() == 0) initial.psi = SpectralField(cfg.grid);
  const double t0 = initial.time;
  const long long steps = steps_for(t_end - t0, cfg.dt);
  FlowState state = std::move(initial);
  if (on_checkpoint) on_checkpoint(state, energy_report(state, cfg));
  for (long long n = 1; n <= steps; ++n) {
    state.psi = integ.predict(state.psi);
    state.time = t0 + static_cast<double>(n) * cfg.dt;
    integ.check_bounded(state.psi, state.time);
    if (on_checkpoint && (n % checkpoint_every == 0 || n == steps)) on_checkpoint(state, energy_report(state, cfg));
  }
  return state;
}

}  // namespace cdasim
