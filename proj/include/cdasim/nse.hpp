#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cdasim/spectral_field.hpp"

namespace cdasim {

/// Stream-function formulation psi_t + InvLap((perp grad psi . grad) Lap psi)
/// = nu Lap psi + F, where F is the stream function of the (divergence-free,
/// time-independent) velocity-level body force f = perp grad F.
struct SolverConfig {
  GridSpec grid{};
  double nu = 1e-3;
  double dt = 5e-3;
  SpectralField forcing;  // stream-level; empty means zero forcing
  double grashof_target = 0.0;

  void validate() const;
};

struct FlowState {
  SpectralField psi;
  double time = 0.0;
};

struct EnergyReport {
  double time = 0.0;
  double energy = 0.0;        // |u|^2 / 2
  double enstrophy = 0.0;     // ||u||^2 / 2
  double grashof = 0.0;       // |f| / nu^2
  double shape_factor = 0.0;  // ||f||_* / |f|
  double rho0 = 0.0;          // nu * shape_factor * grashof
  double rho1 = 0.0;          // nu * grashof
};

/// Equal-amplitude, seeded-phase force on band_lo2 <= |k|^2 <= band_hi2,
/// scaled so that |f| = grashof_target * nu^2. Returns the stream-level field.
SpectralField make_band_forcing(const GridSpec& grid, double band_lo2, double band_hi2, double grashof_target,
                                double nu, std::uint64_t seed);

/// |f| / nu^2 for a stream-level forcing field.
double grashof(const SpectralField& forcing, double nu);

/// -InvLap((u . grad) omega) with u = perp grad psi and omega = Lap psi,
/// evaluated pseudo-spectrally and truncated by the 2/3 rule.
SpectralField nonlinear_term(const SpectralField& psi);

EnergyReport energy_report(const FlowState& state, const SolverConfig& cfg);

/// One-step integrator with precomputed integrating factors
/// E_k = exp(-nu |k|^2 dt). Const methods are safe to call from several
/// threads at once; scratch space is per thread.
class Integrator {
 public:
  explicit Integrator(SolverConfig cfg);

  const SolverConfig& config() const { return cfg_; }
  double dt() const { return cfg_.dt; }
  const std::vector<double>& factors() const { return factor_; }

  /// E_k (psi_k + dt (N_k + F_k)), dealiased and mean-free.
  SpectralField predict(const SpectralField& psi) const;

  /// predict() plus time advance and the blow-up guard.
  FlowState step(const FlowState& state) const;

  /// Throws BlowUpError on non-finite coefficients or |u|^2 > 1e6 rho0^2.
  void check_bounded(const SpectralField& psi, double time, const std::string& label = {}) const;

 private:
  SolverConfig cfg_;
  std::vector<double> factor_;
  double energy_ceiling_ = 0.0;
};

FlowState step_nse(const FlowState& state, const SolverConfig& cfg);

using EnergyCallback = std::function<void(const FlowState&, const EnergyReport&)>;

/// Integrates from `initial` until time >= t_end. The callback, if set, runs
/// on the initial state and every `checkpoint_every` steps.
FlowState spinup(const SolverConfig& cfg, double t_end, FlowState initial, const EnergyCallback& on_checkpoint = {},
                 int checkpoint_every = 100);

/// Number of dt-steps needed to cover `span`.
long long steps_for(double span, double dt);

}  // namespace cdasim
