#include "cdasim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "cdasim/error.hpp"
#include "cdasim/spectral_ops.hpp"
#include "cdasim/transform.hpp"

namespace cdasim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs fn(0..count-1) on the caller plus workers-1 helper threads. Each
/// index is processed exactly once; results must be written to disjoint slots.
class WorkerPool {
 public:
  explicit WorkerPool(int workers) {
    for (int i = 1; i < workers; ++i) threads_.emplace_back([this] { loop(); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void run(std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (threads_.empty() || count <= 1) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    {
      std::lock_guard lock(mu_);
      fn_ = &fn;
      count_ = count;
      next_ = 0;
      done_ = 0;
      error_ = nullptr;
      ++generation_;
    }
    cv_.notify_all();
    work();
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [this] { return done_ == count_; });
    fn_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      work();
    }
  }

  void work() {
    for (;;) {
      std::size_t i;
      const std::function<void(std::size_t)>* fn;
      {
        std::lock_guard lock(mu_);
        if (fn_ == nullptr || next_ >= count_) return;
        i = next_++;
        fn = fn_;
      }
      std::exception_ptr err;
      try {
        (*fn)(i);
      } catch (...) {
        err = std::current_exception();
      }
      std::lock_guard lock(mu_);
      if (err && !error_) error_ = err;
      if (++done_ == count_) done_cv_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* fn_ = nullptr;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  std::size_t done_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t digest(std::uint64_t h, const Observation& obs) {
  h = fnv1a(h, &obs.time, sizeof obs.time);
  const auto c = obs.low_modes.coeffs();
  return fnv1a(h, c.data(), c.size_bytes());
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;

void check_field(HygieneReport& h, const SpectralField& psi) {
  const double scale = max_abs(psi);
  const double defect = hermitian_defect(psi);
  h.hermitian_defect = std::max(h.hermitian_defect, scale > 0.0 ? defect / scale : defect);
  if (psi.size() > 0) h.mean_mode = std::max(h.mean_mode, std::abs(psi[0]));
  ++h.fields_checked;
}

void check_record(HygieneReport& h, const ErrorRecord& r) {
  const double tot2 = r.err_total * r.err_total;
  const double parts = r.err_low * r.err_low + r.err_high * r.err_high;
  const double denom = std::max(tot2, std::numeric_limits<double>::min());
  if (tot2 == 0.0 && parts == 0.0) return;
  h.pythagorean_defect = std::max(h.pythagorean_defect, std::abs(tot2 - parts) / denom);
}

FilterState initial_filter(const TwinConfig& cfg, const FilterParams& p, const FlowState& truth,
                           const Observation& obs0) {
  FilterState s;
  switch (cfg.init_mode) {
    case InitMode::FromObservation:
      s.psi = obs0.low_modes;
      break;
    case InitMode::Zero:
      s.psi = SpectralField(cfg.solver.grid);
      break;
    case InitMode::TruthCopy:
      s.psi = truth.psi;
      break;
  }
  s.psi.pin_mean();
  s.time = truth.time;
  if (p.adaptive) s.adaptive = make_adaptive_state(*p.adaptive);
  return s;
}

std::vector<FilterParams> shared_obs_params(const TwinConfig& cfg) {
  std::vector<FilterParams> params = cfg.filters;
  for (auto& p : params) p.obs = cfg.obs;
  return params;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[hi] * w;
}

}  // namespace

void TwinConfig::validate() const {
  solver.validate();
  obs.validate(solver.grid);
  if (filters.empty()) throw Error("twin run needs at least one filter");
  for (const auto& f : filters) f.validate();
  for (std::size_t i = 0; i < filters.size(); ++i) {
    for (std::size_t j = i + 1; j < filters.size(); ++j) {
      if (filters[i].label == filters[j].label) throw Error("duplicate filter label: " + filters[i].label);
    }
  }
  if (!(t_end > 0.0)) throw Error("t_end must be positive");
  if (checkpoint_every < 1) throw Error("checkpoint_every must be a positive integer");
  if (jobs < 1) throw Error("jobs must be a positive integer");
}

void HygieneReport::merge(const HygieneReport& o) {
  hermitian_defect = std::max(hermitian_defect, o.hermitian_defect);
  mean_mode = std::max(mean_mode, o.mean_mode);
  pythagorean_defect = std::max(pythagorean_defect, o.pythagorean_defect);
  fields_checked += o.fields_checked;
}

ErrorRecord error_metrics(const SpectralField& reference, const SpectralField& estimate, double n_obs) {
  if (!(reference.grid() == estimate.grid())) throw Error("error_metrics: grid mismatch");
  const Lattice& lat = lattice(reference.grid());
  double low = 0.0;
  double high = 0.0;
  double total = 0.0;
  for (std::size_t i = 1; i < reference.size(); ++i) {
    const double w = lat.k2[i] * std::norm(reference[i] - estimate[i]);
    total += w;
    if (in_ball(static_cast<long long>(lat.k2[i]), n_obs)) {
      low += w;
    } else {
      high += w;
    }
  }
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  ErrorRecord r;
  r.err_low = two_pi * std::sqrt(low);
  r.err_high = two_pi * std::sqrt(high);
  r.err_total = two_pi * std::sqrt(total);
  return r;
}

ErrorRecord error_metrics(const FlowState& truth, const FilterState& filt, double n_obs) {
  if (std::abs(truth.time - filt.time) > 1e-9 * std::max(1.0, std::abs(truth.time))) {
    throw Error("error_metrics: truth and filter are at different times");
  }
  ErrorRecord r = error_metrics(truth.psi, filt.psi, n_obs);
  r.time = truth.time;
  return r;
}

TwinResult run_twin(const TwinConfig& cfg, const FlowState& truth0, const FrameVisitor& visit) {
  cfg.validate();
  if (!(truth0.psi.grid() == cfg.solver.grid)) throw Error("initial truth grid does not match solver grid");
  const std::vector<FilterParams> params = shared_obs_params(cfg);
  const Integrator integ(cfg.solver);
  const double dt = cfg.solver.dt;
  const double n_obs = cfg.obs.n_obs;
  std::mt19937_64 rng(cfg.obs.seed);

  TwinResult res;
  FlowState truth = truth0;
  truth.psi.pin_mean();
  Observation obs = noisy_observe(truth, cfg.obs, rng, dt);
  Observation prev = obs;

  std::vector<FilterState> filters;
  for (const auto& p : params) {
    filters.push_back(initial_filter(cfg, p, truth, obs));
    res.series.push_back(ErrorSeries{p.label, {}});
  }
  res.obs_checksums.assign(params.size(), kFnvOffset);

  auto record = [&] {
    check_field(res.hygiene, truth.psi);
    for (std::size_t i = 0; i < filters.size(); ++i) {
      check_field(res.hygiene, filters[i].psi);
      ErrorRecord r = error_metrics(truth, filters[i], n_obs);
      r.mu_active = active_mu(filters[i], params[i]);
      check_record(res.hygiene, r);
      res.series[i].records.push_back(r);
    }
  };

  record();
  if (visit) visit(LockstepFrame{0, true, truth, obs, filters});

  WorkerPool pool(std::min<int>(cfg.jobs, static_cast<int>(filters.size())));
  const long long steps = steps_for(cfg.t_end, dt);
  const double t0 = truth0.time;
  for (long long n = 1; n <= steps; ++n) {
    truth.psi = integ.predict(truth.psi);
    truth.time = t0 + static_cast<double>(n) * dt;
    integ.check_bounded(truth.psi, truth.time, "truth");
    prev = std::move(obs);
    obs = noisy_observe(truth, cfg.obs, rng, dt);

    pool.run(filters.size(), [&](std::size_t i) {
      const Observation& o = params[i].timing == FeedbackTiming::Next ? obs : prev;
      filters[i] = step_filter(filters[i], o, integ, params[i]);
      filters[i].time = truth.time;
      res.obs_checksums[i] = digest(res.obs_checksums[i], o);
    });

    const bool checkpoint = n % cfg.checkpoint_every == 0 || n == steps;
    if (checkpoint) record();
    if (visit) visit(LockstepFrame{n, checkpoint, truth, obs, filters});
  }

  res.final_filters = std::move(filters);
  res.final_truth = std::move(truth);
  return res;
}

std::vector<ErrorSeries> run_replay(const TwinConfig& cfg, std::istream& log) {
  cfg.validate();
  if (cfg.init_mode == InitMode::TruthCopy) throw Error("replay has no truth to copy");
  const std::vector<FilterParams> params = shared_obs_params(cfg);
  const Integrator integ(cfg.solver);
  const double n_obs = cfg.obs.n_obs;
  ObservationLogReader reader(log, cfg.solver.grid);

  std::optional<Observation> first = reader.next();
  if (!first) throw FormatError("observation log is empty");
  Observation obs = std::move(*first);
  Observation prev = obs;
  const FlowState pseudo_truth{obs.low_modes, obs.time};

  std::vector<FilterState> filters;
  std::vector<ErrorSeries> series;
  for (const auto& p : params) {
    filters.push_back(initial_filter(cfg, p, pseudo_truth, obs));
    series.push_back(ErrorSeries{p.label, {}});
  }
  auto record = [&](const Observation& o) {
    for (std::size_t i = 0; i < filters.size(); ++i) {
      ErrorRecord r;
      r.time = filters[i].time;
      r.err_low = observed_error(o, filters[i].psi, n_obs);
      r.err_high = kNaN;
      r.err_total = kNaN;
      r.mu_active = active_mu(filters[i], params[i]);
      series[i].records.push_back(r);
    }
  };
  record(obs);

  long long n = 0;
  bool recorded_last = true;
  while (auto next = reader.next()) {
    ++n;
    prev = std::move(obs);
    obs = std::move(*next);
    for (std::size_t i = 0; i < filters.size(); ++i) {
      const Observation& o = params[i].timing == FeedbackTiming::Next ? obs : prev;
      filters[i] = step_filter(filters[i], o, integ, params[i]);
      filters[i].time = obs.time;
    }
    recorded_last = n % cfg.checkpoint_every == 0;
    if (recorded_last) record(obs);
  }
  if (!recorded_last) record(obs);
  return series;
}

std::string mu_label(double mu) {
  if (std::isinf(mu)) return "sync";
  char buf[64];
  std::snprintf(buf, sizeof buf, "mu=%g", mu);
  return buf;
}

namespace {

struct SweepSetup {
  TwinConfig cfg;
  std::size_t reference = 0;
};

SweepResult run_sweep(const SweepSetup& setup, const FlowState& truth0, const std::vector<double>& mus,
                      const std::vector<double>& fit_mus) {
  const TwinConfig& cfg = setup.cfg;
  const std::size_t ref = setup.reference;
  const std::size_t count = cfg.filters.size();
  std::vector<double> sup_ref(count, 0.0);
  std::vector<ErrorSeries> ref_series(count);
  HygieneReport extra;
  for (std::size_t i = 0; i < count; ++i) ref_series[i].filter_label = cfg.filters[i].label;

  const double n_obs = cfg.obs.n_obs;
  auto visit = [&](const LockstepFrame& f) {
    for (std::size_t i = 0; i < count; ++i) {
      if (i == ref) continue;
      ErrorRecord r = error_metrics(f.filters[ref].psi, f.filters[i].psi, n_obs);
      r.time = f.truth.time;
      sup_ref[i] = std::max(sup_ref[i], r.err_total);
      if (f.checkpoint) {
        r.mu_active = active_mu(f.filters[i], cfg.filters[i]);
        check_record(extra, r);
        ref_series[i].records.push_back(r);
      }
    }
  };
  TwinResult twin = run_twin(cfg, truth0, visit);

  SweepResult out;
  out.reference_label = cfg.filters[ref].label;
  out.hygiene = twin.hygiene;
  out.hygiene.merge(extra);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string& label = cfg.filters[i].label;
    double sup = 0.0;
    for (const auto& r : twin.series[i].records) sup = std::max(sup, r.err_total);
    out.sup_errors[label] = sup;
    out.entries[label] = std::move(twin.series[i]);
    out.mu_of[label] = active_mu(FilterState{}, cfg.filters[i]);
    if (i != ref) {
      out.sup_to_reference[label] = sup_ref[i];
      out.reference_entries[label] = std::move(ref_series[i]);
    }
  }
  (void)mus;
  std::vector<double> xs;
  std::vector<double> ys;
  for (double mu : fit_mus) {
    const double s = out.sup_to_reference.at(mu_label(mu));
    if (mu > 0.0 && s > 0.0) {
      xs.push_back(mu);
      ys.push_back(s);
    }
  }
  out.fit_mus = xs;
  out.fit_slope = xs.size() >= 2 ? fit_loglog_slope(xs, ys) : kNaN;
  return out;
}

std::vector<double> checked_mus(const std::vector<double>& mus) {
  if (mus.empty()) throw Error("mu sweep needs at least one mu");
  std::vector<double> sorted = mus;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw Error("duplicate mu in sweep");
  for (double mu : sorted) {
    if (!(mu >= 0.0) || std::isinf(mu)) throw Error("sweep mu values must be finite and nonnegative");
  }
  return sorted;
}

}  // namespace

SweepResult sweep_mu_infinite(const TwinConfig& base, const FlowState& truth0, const std::vector<double>& mus) {
  const std::vector<double> sorted = checked_mus(mus);
  SweepSetup setup{base, 0};
  setup.cfg.init_mode = InitMode::FromObservation;
  setup.cfg.filters.clear();
  for (double mu : sorted) {
    FilterParams p;
    p.label = mu_label(mu);
    p.kind = FilterKind::Nudging;
    p.mu = mu;
    setup.cfg.filters.push_back(p);
  }
  FilterParams sync;
  sync.label = "sync";
  sync.kind = FilterKind::Synchronization;
  setup.cfg.filters.push_back(sync);
  setup.reference = setup.cfg.filters.size() - 1;
  const std::vector<double> top(sorted.end() - std::min<std::ptrdiff_t>(3, std::ssize(sorted)), sorted.end());
  return run_sweep(setup, truth0, sorted, top);
}

SweepResult sweep_mu_zero(const TwinConfig& base, const FlowState& truth0, const std::vector<double>& mus) {
  const std::vector<double> sorted = checked_mus(mus);
  SweepSetup setup{base, 0};
  setup.cfg.init_mode = InitMode::Zero;
  setup.cfg.filters.clear();
  FilterParams free;
  free.label = "free";
  free.kind = FilterKind::FreeRun;
  setup.cfg.filters.push_back(free);
  for (double mu : sorted) {
    FilterParams p;
    p.label = mu_label(mu);
    p.kind = FilterKind::Nudging;
    p.mu = mu;
    setup.cfg.filters.push_back(p);
  }
  return run_sweep(setup, truth0, sorted, sorted);
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  // splitmix64 finalizer over (base, trial)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EnsembleResult run_noisy_ensemble(const TwinConfig& cfg, const FlowState& truth0, int trials) {
  cfg.validate();
  if (trials < 1) throw Error("ensemble needs at least one trial");
  std::vector<TwinResult> runs(static_cast<std::size_t>(trials));
  {
    WorkerPool pool(std::min(cfg.jobs, trials));
    pool.run(runs.size(), [&](std::size_t t) {
      TwinConfig c = cfg;
      c.jobs = 1;
      c.obs.seed = trial_seed(cfg.seed, static_cast<int>(t));
      runs[t] = run_twin(c, truth0);
    });
  }

  EnsembleResult out;
  for (const auto& r : runs) out.hygiene.merge(r.hygiene);
  for (std::size_t f = 0; f < cfg.filters.size(); ++f) {
    EnsembleSeries es;
    es.label = cfg.filters[f].label;
    es.mean.filter_label = es.label;
    const std::size_t len = runs[0].series[f].records.size();
    for (std::size_t j = 0; j < len; ++j) {
      ErrorRecord m;
      m.time = runs[0].series[f].records[j].time;
      std::vector<double> totals;
      for (const auto& r : runs) {
        const ErrorRecord& x = r.series[f].records[j];
        m.err_low += x.err_low;
        m.err_high += x.err_high;
        m.err_total += x.err_total;
        m.mu_active += x.mu_active;
        totals.push_back(x.err_total);
      }
      const double inv = 1.0 / static_cast<double>(trials);
      m.err_low *= inv;
      m.err_high *= inv;
      m.err_total *= inv;
      m.mu_active *= inv;
      es.mean.records.push_back(m);
      es.p10_total.push_back(quantile(totals, 0.1));
      es.p90_total.push_back(quantile(totals, 0.9));
    }
    for (auto& r : runs) es.trials.push_back(r.series[f]);
    out.filters.push_back(std::move(es));
  }
  return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("fit_line needs at least two paired samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("log-log fit needs positive values");
    lx.push_back(std::log10(x[i]));
    ly.push_back(std::log10(y[i]));
  }
  return fit_line(lx, ly).slope;
}

double mean_square_total(const ErrorSeries& s, double t_from, double t_to) {
  double sum = 0.0;
  long count = 0;
  for (const auto& r : s.records) {
    if (r.time >= t_from && r.time <= t_to) {
      sum += r.err_total * r.err_total;
      ++count;
    }
  }
  if (count == 0) throw Error("no records in averaging window");
  return sum / static_cast<double>(count);
}

double time_average_total(const ErrorSeries& s) {
  const auto& r = s.records;
  if (r.empty()) throw Error("empty series");
  if (r.size() == 1) return r[0].err_total;
  double area = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    area += 0.5 * (r[i].err_total + r[i - 1].err_total) * (r[i].time - r[i - 1].time);
  }
  const double span = r.back().time - r.front().time;
  return span > 0.0 ? area / span : r[0].err_total;
}

double time_to_fraction(const ErrorSeries& s, double fraction) {
  if (s.records.empty()) throw Error("empty series");
  const double target = fraction * s.records.front().err_total;
  const double t0 = s.records.front().time;
  for (const auto& r : s.records) {
    if (r.err_total <= target) return r.time - t0;
  }
  return std::numeric_limits<double>::infinity();
}

namespace {

constexpr const char* kSeriesHeader = "time,err_low,err_high,err_total,mu_active";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok, long line) {
  if (tok == "nan" || tok == "-nan") return kNaN;
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != tok.size()) {
    throw FormatError("series line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  return v;
}

}  // namespace

void write_series(std::ostream& out, const ErrorSeries& s) {
  out << kSeriesHeader << '\n';
  for (const auto& r : s.records) {
    out << fmt(r.time) << ',' << fmt(r.err_low) << ',' << fmt(r.err_high) << ',' << fmt(r.err_total) << ','
        << fmt(r.mu_active) << '\n';
  }
}

ErrorSeries read_series(std::istream& in, const std::string& label) {
  ErrorSeries s;
  s.filter_label = label;
  std::string line;
  if (!std::getline(in, line) || line != kSeriesHeader) {
    throw FormatError(std::string("series header must be '") + kSeriesHeader + "'");
  }
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> tok;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) tok.push_back(cell);
    if (tok.size() != 5) throw FormatError("series line " + std::to_string(line_no) + ": expected 5 fields");
    s.records.push_back(ErrorRecord{parse_double(tok[0], line_no), parse_double(tok[1], line_no),
                                    parse_double(tok[2], line_no), parse_double(tok[3], line_no),
                                    parse_double(tok[4], line_no)});
  }
  return s;
}

void save_series(const ErrorSeries& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_series(out, s);
  if (!out) throw Error("write failed: " + path.string());
}

ErrorSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return read_series(in, path.stem().string());
}

void write_sweep_summary(std::ostream& out, const SweepResult& r) {
  out << "label,mu,sup_error,fit_slope\n";
  for (const auto& [label, mu] : r.mu_of) {
    const bool is_ref = label == r.reference_label;
    const double sup = is_ref ? r.sup_errors.at(label) : r.sup_to_reference.at(label);
    out << label << ',' << fmt(mu) << ',' << fmt(sup) << ',' << fmt(r.fit_slope) << '\n';
  }
}

}  // namespace cdasim
