#include "cdasim/filters.hpp"

#include <cmath>
#include <limits>

#include "cdasim/error.hpp"
#include "cdasim/spectral_ops.hpp"
#include "cdasim/transform.hpp"

namespace cdasim {

namespace {

void check_obs_time(const FilterState& state, const Observation& obs, const Integrator& integ, FeedbackTiming timing) {
  const double expected = timing == FeedbackTiming::Next ? state.time + integ.dt() : state.time;
  if (std::abs(obs.time - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
    throw Error("observation time " + std::to_string(obs.time) + " does not match filter step target " +
                std::to_string(expected));
  }
  if (!(obs.low_modes.grid() == state.psi.grid())) throw Error("observation grid does not match filter grid");
}

template <typename Blend>
FilterState blend_observed(const FilterState& state, const Observation& obs, const Integrator& integ,
                           const FilterParams& params, Blend blend) {
  check_obs_time(state, obs, integ, params.timing);
  SpectralField next = integ.predict(state.psi);
  const Lattice& lat = lattice(next.grid());
  const double n_obs = params.obs.n_obs;
  for (std::size_t i = 1; i < next.size(); ++i) {
    if (in_ball(static_cast<long long>(lat.k2[i]), n_obs)) next[i] = blend(next[i], obs.low_modes[i]);
  }
  next.pin_mean();
  FilterState out{std::move(next), state.time + integ.dt(), state.adaptive};
  integ.check_bounded(out.psi, out.time, params.label);
  return out;
}

}  // namespace

AdaptiveState make_adaptive_state(const AdaptiveSettings& s) {
  if (!(s.mu0 > 0.0)) throw Error("adaptive mu0 must be positive");
  if (s.window < 1) throw Error("adaptive window must be a positive integer");
  if (!(s.mu_floor >= 0.0)) throw Error("mu_floor must be nonnegative");
  AdaptiveState a;
  a.mu = s.mu0;
  a.tol = s.tol;
  a.window = s.window;
  a.mu_floor = s.mu_floor;
  return a;
}

void FilterParams::validate() const {
  if (kind == FilterKind::Nudging && !(mu >= 0.0) && !adaptive) throw Error("nudging requires mu >= 0");
  if (adaptive && kind != FilterKind::Nudging) throw Error("adaptive control applies to nudging filters only");
}

double active_mu(const FilterState& state, const FilterParams& params) {
  switch (params.kind) {
    case FilterKind::Nudging:
      return state.adaptive ? state.adaptive->mu : params.mu;
    case FilterKind::Synchronization:
      return std::numeric_limits<double>::infinity();
    case FilterKind::FreeRun:
      return 0.0;
  }
  return 0.0;
}

FilterState step_nudging(const FilterState& state, const Observation& obs, const Integrator& integ,
                         const FilterParams& params) {
  const double mu = active_mu(state, params);
  if (!(mu >= 0.0)) throw Error("nudging requires mu >= 0");
  if (mu == 0.0) {
    check_obs_time(state, obs, integ, params.timing);
    FilterState out{integ.predict(state.psi), state.time + integ.dt(), state.adaptive};
    integ.check_bounded(out.psi, out.time, params.label);
    return out;
  }
  if (std::isinf(mu)) {
    return blend_observed(state, obs, integ, params, [](const Complex&, const Complex& o) { return o; });
  }
  const double gain = integ.dt() * mu;
  const double denom = 1.0 + gain;
  return blend_observed(state, obs, integ, params,
                        [gain, denom](const Complex& pred, const Complex& o) { return (pred + gain * o) / denom; });
}

FilterState step_sync(const FilterState& state, const Observation& obs, const Integrator& integ,
                      const FilterParams& params) {
  return blend_observed(state, obs, integ, params, [](const Complex&, const Complex& o) { return o; });
}

FilterState step_free(const FilterState& state, const Integrator& integ, const std::string& label) {
  FilterState out{integ.predict(state.psi), state.time + integ.dt(), state.adaptive};
  integ.check_bounded(out.psi, out.time, label);
  return out;
}

double observed_error(const Observation& obs, const SpectralField& psi, double n_obs) {
  return velocity_l2_norm(project_low(obs.low_modes - psi, n_obs));
}

FilterState step_filter(const FilterState& state, const Observation& obs, const Integrator& integ,
                        const FilterParams& params) {
  switch (params.kind) {
    case FilterKind::FreeRun:
      return step_free(state, integ, params.label);
    case FilterKind::Synchronization:
      return step_sync(state, obs, integ, params);
    case FilterKind::Nudging: {
      FilterState out = step_nudging(state, obs, integ, params);
      if (out.adaptive) {
        out.adaptive = adaptive_mu_update(std::move(*out.adaptive), observed_error(obs, out.psi, params.obs.n_obs),
                                          integ.dt());
      }
      return out;
    }
  }
  throw Error("unknown filter kind");
}

AdaptiveState adaptive_mu_update(AdaptiveState a, double err_obs, double dt) {
  if (!(err_obs >= 0.0)) throw Error("observed error must be nonnegative");
  if (!(dt > 0.0)) throw Error("dt must be positive");
  const double floor_err = std::numeric_limits<double>::epsilon();
  a.err_history.push_back(std::max(err_obs, floor_err));
  while (a.err_history.size() > static_cast<std::size_t>(a.window) + 1) a.err_history.pop_front();
  ++a.update_counter;
  if (a.update_counter > a.window) {
    const double slope = (std::log(a.err_history.back()) - std::log(a.err_history.front())) / (a.window * dt);
    const double lowered = a.mu / 10.0;
    if (slope > a.tol && lowered >= a.mu_floor * (1.0 - 1e-12)) {
      a.mu = lowered;
      a.update_counter = 0;
    }
  }
  return a;
}

}  // namespace cdasim
