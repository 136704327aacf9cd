#pragma once

#include <deque>
#include <optional>
#include <string>

#include "cdasim/nse.hpp"
#include "cdasim/observations.hpp"

namespace cdasim {

enum class FilterKind { Nudging, Synchronization, FreeRun };

/// Which observation enters the implicit feedback term.
enum class FeedbackTiming {
  Next,     // o(t_{n+1}): fully implicit feedback
  Current,  // o(t_n): ablation variant
};

/// Parameters of the decade-decay controller for mu.
struct AdaptiveSettings {
  double mu0 = 1e5;
  int window = 5;
  double tol = 0.0;
  double mu_floor = 1e-2;
};

/// Controller state. mu never increases; each change divides it by 10.
struct AdaptiveState {
  double mu = 1e5;
  double tol = 0.0;
  int window = 5;
  int update_counter = 0;
  double mu_floor = 1e-2;
  std::deque<double> err_history;  // the last window + 1 observed errors
};

AdaptiveState make_adaptive_state(const AdaptiveSettings& settings);

struct FilterParams {
  std::string label;
  FilterKind kind = FilterKind::Nudging;
  double mu = 0.0;  // ignored by Synchronization and FreeRun
  ObservationSpec obs{};
  std::optional<AdaptiveSettings> adaptive;
  FeedbackTiming timing = FeedbackTiming::Next;

  void validate() const;
};

struct FilterState {
  SpectralField psi;
  double time = 0.0;
  std::optional<AdaptiveState> adaptive;
};

/// The nudging parameter currently in force for this filter.
double active_mu(const FilterState& state, const FilterParams& params);

/// Implicit feedback step: per observed mode
///   psi_k <- (E_k (psi_k + dt (N_k + F_k)) + dt mu o_k) / (1 + dt mu),
/// unobserved modes take the plain integrator prediction. mu = 0 reproduces
/// Integrator::step exactly; mu = +inf copies the observation.
FilterState step_nudging(const FilterState& state, const Observation& obs, const Integrator& integ,
                         const FilterParams& params);

/// Direct replacement: the stepped field's high modes plus the observation.
FilterState step_sync(const FilterState& state, const Observation& obs, const Integrator& integ,
                      const FilterParams& params);

/// Unassimilated model run.
FilterState step_free(const FilterState& state, const Integrator& integ, const std::string& label = {});

/// Dispatches on params.kind. For adaptive nudging filters the controller is
/// updated afterwards with the observed misfit |P_N(o - v)|.
FilterState step_filter(const FilterState& state, const Observation& obs, const Integrator& integ,
                        const FilterParams& params);

/// Velocity-level |P_N(o - v)|, the only error a filter can see.
double observed_error(const Observation& obs, const SpectralField& psi, double n_obs);

/// Pushes err_obs and, once more than `window` samples have arrived since the
/// last change, compares log-errors `window` steps apart. If the growth rate
/// (log e_i - log e_{i-window}) / (window dt) exceeds tol, mu drops a decade
/// (not below mu_floor) and the counter restarts. Zero errors are floored at
/// machine epsilon.
AdaptiveState adaptive_mu_update(AdaptiveState state, double err_obs, double dt);

}  // namespace cdasim
