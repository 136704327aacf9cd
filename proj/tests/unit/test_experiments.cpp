#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cdasim/error.hpp"
#include "cdasim/experiments.hpp"
#include "cdasim/spectral_ops.hpp"
#include "cdasim/transform.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cdasim;
using testing::random_field;

namespace {

TwinConfig small_twin(double n_obs = 5.0) {
  TwinConfig c;
  c.solver.grid = GridSpec{32};
  c.solver.nu = 0.02;
  c.solver.dt = 5e-3;
  c.solver.forcing = make_band_forcing(c.solver.grid, 4, 8, 300.0, c.solver.nu, 2);
  c.obs.n_obs = n_obs;
  c.t_end = 0.5;
  c.checkpoint_every = 10;
  return c;
}

FilterParams nudging(double mu) {
  FilterParams p;
  p.label = mu_label(mu);
  p.kind = FilterKind::Nudging;
  p.mu = mu;
  return p;
}

FilterParams sync_filter() {
  FilterParams p;
  p.label = "sync";
  p.kind = FilterKind::Synchronization;
  return p;
}

FlowState warm_truth(const TwinConfig& c) { return spinup(c.solver, 1.0, FlowState{random_field(c.solver.grid, 3, true, 0.05), 0.0}); }

}  // namespace

TEST_CASE("error metrics") {
  const GridSpec g{32};
  const SpectralField a = random_field(g, 1);
  const SpectralField b = random_field(g, 2);

  const ErrorRecord same = error_metrics(a, a, 4.0);
  CHECK(same.err_low == 0.0);
  CHECK(same.err_high == 0.0);
  CHECK(same.err_total == 0.0);

  const SpectralField high_only = a + project_high(b, 4.0);
  const ErrorRecord h = error_metrics(a, high_only, 4.0);
  CHECK(h.err_low == 0.0);
  CHECK(h.err_high == doctest::Approx(h.err_total).epsilon(1e-14));

  // Independent oracle: the norm functions on the projected difference.
  const ErrorRecord r = error_metrics(a, b, 4.0);
  const SpectralField d = a - b;
  CHECK(r.err_low == doctest::Approx(velocity_l2_norm(project_low(d, 4.0))).epsilon(1e-13));
  CHECK(r.err_high == doctest::Approx(velocity_l2_norm(project_high(d, 4.0))).epsilon(1e-13));
  CHECK(r.err_total == doctest::Approx(velocity_l2_norm(d)).epsilon(1e-13));
  CHECK(r.err_total * r.err_total == doctest::Approx(r.err_low * r.err_low + r.err_high * r.err_high).epsilon(1e-12));

  CHECK_THROWS_AS(error_metrics(FlowState{a, 1.0}, FilterState{b, 2.0, {}}, 4.0), Error);
}

TEST_CASE("twin runs") {
  TwinConfig c = small_twin();
  const FlowState truth0 = warm_truth(c);

  SUBCASE("filter started on the truth stays on it") {
    c.init_mode = InitMode::TruthCopy;
    c.filters = {nudging(10.0), sync_filter()};
    const TwinResult r = run_twin(c, truth0);
    for (const auto& s : r.series) {
      for (const auto& rec : s.records) CHECK(rec.err_total <= 1e-12 * velocity_l2_norm(truth0.psi));
    }
  }

  SUBCASE("synchronization matches observed modes exactly") {
    c.filters = {sync_filter()};
    const TwinResult r = run_twin(c, truth0);
    for (const auto& rec : r.series[0].records) CHECK(rec.err_low <= 1e-14);
    CHECK(r.series[0].records.back().time == doctest::Approx(truth0.time + c.t_end));
    CHECK(r.final_truth.time == doctest::Approx(truth0.time + c.t_end));
  }

  SUBCASE("record cadence") {
    c.filters = {sync_filter()};
    c.t_end = 0.52;  // 104 steps: records at 0, 10, ..., 100 and the last
    const TwinResult r = run_twin(c, truth0);
    CHECK(r.series[0].records.size() == 12);
  }

  SUBCASE("every filter consumes the same observations") {
    c.obs.noise_sigma = 0.1;
    c.filters = {nudging(1.0), nudging(100.0), sync_filter()};
    const TwinResult r = run_twin(c, truth0);
    REQUIRE(r.obs_checksums.size() == 3);
    CHECK(r.obs_checksums[0] == r.obs_checksums[1]);
    CHECK(r.obs_checksums[1] == r.obs_checksums[2]);
    CHECK(r.hygiene.fields_checked > 0);
    CHECK(r.hygiene.hermitian_defect <= 1e-13);
  }

  SUBCASE("thread count does not change results") {
    c.obs.noise_sigma = 0.1;
    c.filters = {nudging(1.0), nudging(1e4), sync_filter()};
    const TwinResult one = run_twin(c, truth0);
    c.jobs = 3;
    const TwinResult three = run_twin(c, truth0);
    for (std::size_t i = 0; i < one.final_filters.size(); ++i) {
      CHECK(one.final_filters[i].psi == three.final_filters[i].psi);
    }
  }

  SUBCASE("visitor sees every step") {
    c.filters = {sync_filter()};
    long long frames = 0;
    long long checkpoints = 0;
    run_twin(c, truth0, [&](const LockstepFrame& f) {
      ++frames;
      checkpoints += f.checkpoint ? 1 : 0;
      CHECK(f.obs.time == f.truth.time);
    });
    CHECK(frames == 1 + 100);
    CHECK(checkpoints == 11);
  }

  SUBCASE("invalid configurations") {
    CHECK_THROWS_AS(run_twin(c, truth0), Error);  // no filters
    c.filters = {sync_filter(), sync_filter()};
    CHECK_THROWS_AS(run_twin(c, truth0), Error);  // duplicate labels
    c.filters = {sync_filter()};
    c.checkpoint_every = 0;
    CHECK_THROWS_AS(run_twin(c, truth0), Error);
  }
}

TEST_CASE("replay from an observation log") {
  TwinConfig c = small_twin();
  const FlowState truth0 = warm_truth(c);
  c.filters = {nudging(10.0), sync_filter()};
  std::stringstream log;
  ObservationLogWriter writer(log, c.obs.n_obs);
  const TwinResult live = run_twin(c, truth0, [&](const LockstepFrame& f) { writer.write(f.obs); });

  const std::vector<ErrorSeries> replay = run_replay(c, log);
  REQUIRE(replay.size() == live.series.size());
  for (std::size_t i = 0; i < replay.size(); ++i) {
    REQUIRE(replay[i].records.size() == live.series[i].records.size());
    for (std::size_t j = 0; j < replay[i].records.size(); ++j) {
      const auto& a = replay[i].records[j];
      const auto& b = live.series[i].records[j];
      CHECK(a.time == doctest::Approx(b.time));
      CHECK(a.err_low == doctest::Approx(b.err_low).epsilon(1e-10).scale(1e-12));
      CHECK(std::isnan(a.err_total));
    }
  }
  std::stringstream empty("time,kx,ky,re,im\n");
  CHECK_THROWS_AS(run_replay(c, empty), FormatError);
}

TEST_CASE("mu sweeps") {
  TwinConfig c = small_twin();
  c.t_end = 0.3;
  const FlowState truth0 = warm_truth(c);

  SUBCASE("zero limit: mu = 0 coincides with the free run") {
    const SweepResult r = sweep_mu_zero(c, truth0, {0.0, 1e-3, 1e-1});
    CHECK(r.reference_label == "free");
    CHECK(r.sup_to_reference.at(mu_label(0.0)) == 0.0);
    CHECK(r.sup_to_reference.at(mu_label(1e-3)) < r.sup_to_reference.at(mu_label(1e-1)));
    // Short horizon: the perturbation is linear in mu.
    CHECK(r.fit_slope == doctest::Approx(1.0).epsilon(0.05));
  }

  SUBCASE("infinite limit approaches synchronization") {
    const SweepResult r = sweep_mu_infinite(c, truth0, {1e2, 1e4, 1e6});
    CHECK(r.reference_label == "sync");
    CHECK(r.sup_to_reference.at(mu_label(1e6)) < r.sup_to_reference.at(mu_label(1e4)));
    CHECK(r.sup_to_reference.at(mu_label(1e4)) < r.sup_to_reference.at(mu_label(1e2)));
    CHECK(r.fit_slope < -0.5);
    std::ostringstream out;
    write_sweep_summary(out, r);
    CHECK(out.str().rfind("label,mu,sup_error,fit_slope\n", 0) == 0);
    int lines = 0;
    for (char ch : out.str()) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 1 + 4);
  }
}

TEST_CASE("noisy ensemble") {
  TwinConfig c = small_twin();
  c.t_end = 0.2;
  c.obs.noise_sigma = 0.1;
  c.filters = {nudging(100.0)};
  const FlowState truth0 = warm_truth(c);
  const EnsembleResult a = run_noisy_ensemble(c, truth0, 3);
  c.jobs = 2;
  const EnsembleResult b = run_noisy_ensemble(c, truth0, 3);
  REQUIRE(a.filters.size() == 1);
  const EnsembleSeries& s = a.filters[0];
  CHECK(s.trials.size() == 3);
  for (std::size_t j = 0; j < s.mean.records.size(); ++j) {
    double sum = 0.0;
    for (const auto& t : s.trials) sum += t.records[j].err_total;
    CHECK(s.mean.records[j].err_total == doctest::Approx(sum / 3.0).epsilon(1e-14));
    CHECK(s.p10_total[j] <= s.mean.records[j].err_total + 1e-15);
    CHECK(s.p90_total[j] >= s.p10_total[j]);
    CHECK(b.filters[0].mean.records[j].err_total == s.mean.records[j].err_total);
  }
  // Distinct trials really see distinct noise.
  CHECK(s.trials[0].records.back().err_total != s.trials[1].records.back().err_total);
  CHECK(trial_seed(2024, 0) != trial_seed(2024, 1));
  CHECK(trial_seed(2024, 5) == trial_seed(2024, 5));
}

TEST_CASE("series statistics") {
  const double xs[] = {1.0, 2.0, 3.0, 4.0};
  const double ys[] = {3.0, 5.0, 7.0, 9.0};
  const LineFit f = fit_line(xs, ys);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));

  const double mus[] = {1e-3, 1e-2, 1e-1};
  const double errs[] = {2e-6, 2e-4, 2e-2};
  CHECK(fit_loglog_slope(mus, errs) == doctest::Approx(2.0));

  ErrorSeries s{"x", {}};
  for (int i = 0; i <= 10; ++i) {
    ErrorRecord r;
    r.time = i;
    r.err_total = 10.0 - i;
    s.records.push_back(r);
  }
  CHECK(time_average_total(s) == doctest::Approx(5.0));
  CHECK(mean_square_total(s, 8.0, 10.0) == doctest::Approx((4.0 + 1.0 + 0.0) / 3.0));
  CHECK(time_to_fraction(s, 0.5) == doctest::Approx(5.0));
  CHECK(time_to_fraction(s, -1.0) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(mean_square_total(s, 20.0, 30.0), Error);
  CHECK_THROWS_AS(time_average_total(ErrorSeries{}), Error);
}

TEST_CASE("series persistence") {
  ErrorSeries s{"mu=10", {}};
  s.records.push_back(ErrorRecord{0.0, 1.0 / 3.0, std::numbers::pi, 1e-300, 10.0});
  s.records.push_back(ErrorRecord{0.1, 0.0, std::nan(""), std::numeric_limits<double>::infinity(), 10.0});
  std::stringstream buf;
  write_series(buf, s);
  CHECK(buf.str().rfind("time,err_low,err_high,err_total,mu_active\n", 0) == 0);
  const ErrorSeries back = read_series(buf, "mu=10");
  CHECK(back.filter_label == "mu=10");
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].err_low == 1.0 / 3.0);
  CHECK(back.records[0].err_high == std::numbers::pi);
  CHECK(back.records[0].err_total == 1e-300);
  CHECK(std::isnan(back.records[1].err_high));
  CHECK(std::isinf(back.records[1].err_total));

  std::stringstream bad("time,err\n");
  CHECK_THROWS_AS(read_series(bad), FormatError);

  CHECK(mu_label(std::numeric_limits<double>::infinity()) == "sync");
  CHECK(mu_label(100.0) == "mu=100");
  CHECK(mu_label(1e8) == "mu=1e+08");
}
