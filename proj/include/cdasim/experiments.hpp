#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cdasim/filters.hpp"
#include "cdasim/nse.hpp"
#include "cdasim/observations.hpp"

namespace cdasim {

enum class InitMode {
  FromObservation,  // psi_0 = first observation, unobserved modes zero
  Zero,
  TruthCopy,
};

struct TwinConfig {
  SolverConfig solver;
  ObservationSpec obs;
  std::vector<FilterParams> filters;
  double t_end = 20.0;  // assimilation span measured from the truth's start time
  InitMode init_mode = InitMode::FromObservation;
  int checkpoint_every = 10;
  std::uint64_t seed = 0;  // base seed for ensemble trials
  int jobs = 1;

  void validate() const;
};

struct ErrorRecord {
  double time = 0.0;
  double err_low = 0.0;
  double err_high = 0.0;
  double err_total = 0.0;
  double mu_active = 0.0;
};

struct ErrorSeries {
  std::string filter_label;
  std::vector<ErrorRecord> records;
};

/// Worst spectral-invariant violations seen across a run.
struct HygieneReport {
  double hermitian_defect = 0.0;    // relative to the field's largest coefficient
  double mean_mode = 0.0;           // largest |c_0|
  double pythagorean_defect = 0.0;  // relative |err_total^2 - err_low^2 - err_high^2|
  long long fields_checked = 0;

  void merge(const HygieneReport& other);
};

/// One time level of a lockstep run, handed to observers after every step
/// (and once before the first).
struct LockstepFrame {
  long long step = 0;
  bool checkpoint = false;  // an ErrorRecord is taken at this step
  const FlowState& truth;
  const Observation& obs;
  std::span<const FilterState> filters;
};

using FrameVisitor = std::function<void(const LockstepFrame&)>;

struct TwinResult {
  std::vector<ErrorSeries> series;              // one per filter, errors against truth
  std::vector<std::uint64_t> obs_checksums;     // digest of every observation each filter consumed
  std::vector<FilterState> final_filters;
  FlowState final_truth;
  HygieneReport hygiene;
};

/// Velocity-level L2 errors of P_N, Q_N and the whole difference.
ErrorRecord error_metrics(const FlowState& truth, const FilterState& filt, double n_obs);
ErrorRecord error_metrics(const SpectralField& reference, const SpectralField& estimate, double n_obs);

/// Identical-twin run: truth and all filters advance in one time loop; each
/// step the truth is advanced, observed (with noise when noise_sigma > 0),
/// and every filter consumes that same observation.
TwinResult run_twin(const TwinConfig& cfg, const FlowState& truth0, const FrameVisitor& visit = {});

/// Drives filters from a recorded observation log instead of a live truth.
/// Without a truth only the observed misfit is known: err_low holds
/// |P_N(o - v)| and err_high, err_total are NaN.
std::vector<ErrorSeries> run_replay(const TwinConfig& cfg, std::istream& log);

struct SweepResult {
  std::map<std::string, ErrorSeries> entries;               // errors against truth
  std::map<std::string, ErrorSeries> reference_entries;     // errors against the reference filter
  std::map<std::string, double> sup_errors;                 // sup_t total error against truth
  std::map<std::string, double> sup_to_reference;           // sup_t |v_mu - v_ref|
  std::map<std::string, double> mu_of;                      // nudging parameter per label
  std::string reference_label;
  double fit_slope = 0.0;
  std::vector<double> fit_mus;  // inclusion window of the log-log fit
  HygieneReport hygiene;
};

std::string mu_label(double mu);

/// Nudging at every mu plus one synchronization filter, all started from the
/// first observation. sup_to_reference holds sup_t |v_mu - v_sync|; the fit
/// covers the three largest mu values.
SweepResult sweep_mu_infinite(const TwinConfig& cfg, const FlowState& truth0, const std::vector<double>& mus);

/// Nudging at every mu plus an unassimilated run, all started from zero.
/// Errors are taken against that free run; the fit covers all mu.
SweepResult sweep_mu_zero(const TwinConfig& cfg, const FlowState& truth0, const std::vector<double>& mus);

struct EnsembleSeries {
  std::string label;
  ErrorSeries mean;               // componentwise mean over trials
  std::vector<double> p10_total;  // interdecile band of err_total per record
  std::vector<double> p90_total;
  std::vector<ErrorSeries> trials;
};

struct EnsembleResult {
  std::vector<EnsembleSeries> filters;
  HygieneReport hygiene;
};

/// Repeats run_twin with trial seeds derived from cfg.seed.
EnsembleResult run_noisy_ensemble(const TwinConfig& cfg, const FlowState& truth0, int trials);

std::uint64_t trial_seed(std::uint64_t base, int trial);

// Series statistics.

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log10(y) against log10(x).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// Mean of err_total^2 over records with t_from <= time <= t_to.
double mean_square_total(const ErrorSeries& s, double t_from, double t_to);

/// Time-average of err_total over the series (trapezoidal).
double time_average_total(const ErrorSeries& s);

/// First time err_total drops to fraction * (first record's err_total); +inf if never.
double time_to_fraction(const ErrorSeries& s, double fraction);

// Persistence.

void write_series(std::ostream& out, const ErrorSeries& s);
ErrorSeries read_series(std::istream& in, const std::string& label = {});
void save_series(const ErrorSeries& s, const std::filesystem::path& path);
ErrorSeries load_series(const std::filesystem::path& path);

/// label,mu,sup_error,fit_slope rows. For nudging rows sup_error is
/// sup_to_reference; the reference row reports its sup error against truth.
void write_sweep_summary(std::ostream& out, const SweepResult& r);

}  // namespace cdasim
