#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cdasim/experiments.hpp"

namespace cdasim {

/// Every tunable of a run, flat. Text form is `key = value`, one per line,
/// `#` starts a comment.
struct RunConfig {
  // solver
  int resolution = 128;
  double dealias_fraction = 2.0 / 3.0;
  double nu = 5e-3;
  double dt = 2e-3;
  double grashof = 2e4;
  double forcing_band_lo = 10.0;
  double forcing_band_hi = 12.0;
  std::uint64_t forcing_seed = 7;

  // spin-up
  double spinup_t_end = 150.0;
  int energy_every = 500;
  std::string initial_snapshot;

  // observations
  double n_obs = 20.0;
  double noise_sigma = 0.0;
  std::string noise_units = "dft";
  bool noise_white = false;
  std::uint64_t obs_seed = 1;

  // assimilation
  double t_end = 20.0;
  std::string init_mode = "from_observation";
  int checkpoint_every = 10;
  std::string filters = "sync";
  std::string mus = "1,10,100,1e4,1e6,1e8";
  std::string feedback_timing = "next";
  double adaptive_mu0 = 1e5;
  int adaptive_window = 5;
  double adaptive_tol = 0.0;
  double adaptive_mu_floor = 1e-2;

  // ensembles and execution
  int trials = 10;
  std::uint64_t seed = 2024;
  int jobs = 1;
};

struct ConfigKey {
  std::string name;
  std::string unit;
  std::string help;
};

/// All keys in schema order.
const std::vector<ConfigKey>& config_keys();

/// "desk" or "paper".
RunConfig preset(std::string_view name);

/// Throws ConfigError naming the valid keys when `key` is unknown.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_setting(const RunConfig& cfg, std::string_view key);

/// Applies `key = value` lines in order.
void apply_config_text(RunConfig& cfg, std::istream& in);
void load_config_file(RunConfig& cfg, const std::string& path);

/// Every key with its current value, in schema order; readable by apply_config_text.
void write_config(std::ostream& out, const RunConfig& cfg);

/// Comma-separated numbers.
std::vector<double> parse_number_list(std::string_view text);

SolverConfig make_solver_config(const RunConfig& cfg);
ObservationSpec make_observation_spec(const RunConfig& cfg);

/// Filter list entries: `sync`, `free`, `mu=<value>`, `adaptive`.
std::vector<FilterParams> make_filters(const RunConfig& cfg);

TwinConfig make_twin_config(const RunConfig& cfg);

/// The truth's starting state: initial_snapshot if set (its grid and nu must
/// match), otherwise a spin-up from rest to spinup_t_end.
FlowState initial_truth(const RunConfig& cfg, const EnergyCallback& on_checkpoint = {});

}  // namespace cdasim
