// cdasim command-line driver.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdasim/config.hpp"
#include "cdasim/error.hpp"
#include "cdasim/experiments.hpp"
#include "cdasim/snapshot.hpp"
#include "cdasim/spectral_ops.hpp"

namespace fs = std::filesystem;
using namespace cdasim;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kBlowUp = 3 };

struct Options {
  std::string verb;
  std::string preset = "desk";
  std::string config_path;
  std::vector<std::string> sets;
  std::string out = "run";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mus;
  std::vector<std::string> filters;
  std::optional<double> n_obs;
  std::optional<double> noise_sigma;
  std::optional<double> t_end;
  std::optional<double> dt;
  std::optional<int> jobs;
  bool force = false;
  std::string snapshot;
  bool obs_log = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string keys_help() {
  std::ostringstream os;
  os << "Config keys (key = value lines in --config files, or --set key=value):\n";
  const RunConfig desk = preset("desk");
  for (const auto& k : config_keys()) {
    os << "  " << k.name << " [" << k.unit << "] " << k.help << " (desk: " << get_setting(desk, k.name) << ")\n";
  }
  os << "\nExit codes: 0 success, 1 runtime failure, 2 usage or config error, 3 solution blow-up.\n";
  return os.str();
}

RunConfig resolve_config(const Options& o) {
  RunConfig c = preset(o.preset);
  if (!o.config_path.empty()) load_config_file(c, o.config_path);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) {
    c.obs_seed = *o.seed;
    c.seed = *o.seed;
  }
  if (o.mus) c.mus = *o.mus;
  if (!o.filters.empty()) {
    std::string joined;
    for (const auto& f : o.filters) joined += (joined.empty() ? "" : ",") + f;
    c.filters = joined;
  }
  if (o.n_obs) c.n_obs = *o.n_obs;
  if (o.noise_sigma) c.noise_sigma = *o.noise_sigma;
  if (o.t_end) (o.verb == "spinup" ? c.spinup_t_end : c.t_end) = *o.t_end;
  if (o.dt) c.dt = *o.dt;
  if (o.jobs) c.jobs = *o.jobs;
  return c;
}

std::string safe_name(const std::string& label) {
  std::string s = label;
  for (char& ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_' || ch == '+')) ch = '_';
  }
  return s;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  body(out);
  if (!out) throw Error("write failed: " + path.string());
}

void write_manifest(const fs::path& dir, const Options& o, const RunConfig& c, int argc, char** argv) {
  write_file(dir / "manifest.txt", [&](std::ostream& out) {
    out << "# cdasim run manifest; rerun with: cdasim " << o.verb << " --config manifest.txt\n";
    out << "# version = " << CDASIM_VERSION << "\n";
    out << "# verb = " << o.verb << "\n";
    out << "# command =";
    for (int i = 0; i < argc; ++i) out << ' ' << argv[i];
    out << "\n";
    write_config(out, c);
  });
}

void write_energy_row(std::ostream& out, const EnergyReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.time, r.energy, r.enstrophy,
                r.grashof, r.shape_factor, r.rho0, r.rho1);
  out << buf;
}

FlowState truth_for(const RunConfig& c, const fs::path& dir) {
  if (!c.initial_snapshot.empty()) return initial_truth(c);
  std::ofstream energy(dir / "energy.csv", std::ios::binary);
  energy << "time,energy,enstrophy,grashof,shape_factor,rho0,rho1\n";
  FlowState truth = initial_truth(c, [&](const FlowState&, const EnergyReport& r) { write_energy_row(energy, r); });
  save_snapshot(Snapshot{truth.psi, truth.time, c.nu}, dir / "truth0.cdaf");
  return truth;
}

void run_spinup(const RunConfig& c, const fs::path& dir) {
  const SolverConfig solver = make_solver_config(c);
  FlowState start;
  if (!c.initial_snapshot.empty()) start = initial_truth(c);
  std::ofstream energy(dir / "energy.csv", std::ios::binary);
  energy << "time,energy,enstrophy,grashof,shape_factor,rho0,rho1\n";
  const FlowState end = spinup(solver, c.spinup_t_end, std::move(start),
                               [&](const FlowState&, const EnergyReport& r) { write_energy_row(energy, r); },
                               c.energy_every);
  save_snapshot(Snapshot{end.psi, end.time, c.nu}, dir / "spinup.cdaf");
  const EnergyReport r = energy_report(end, solver);
  std::printf("spin-up reached t = %g: |u| = %.6g, rho0 = %.6g, snapshot %s\n", end.time, std::sqrt(2.0 * r.energy),
              r.rho0, (dir / "spinup.cdaf").string().c_str());
}

void run_twin_verb(const RunConfig& c, const fs::path& dir, bool log_obs) {
  const TwinConfig tc = make_twin_config(c);
  const FlowState truth0 = truth_for(c, dir);
  std::optional<std::ofstream> log_file;
  std::optional<ObservationLogWriter> log;
  if (log_obs) {
    log_file.emplace(dir / "observations.csv", std::ios::binary);
    log.emplace(*log_file, tc.obs.n_obs);
  }
  FrameVisitor visit;
  if (log) visit = [&](const LockstepFrame& f) { log->write(f.obs); };
  const TwinResult res = run_twin(tc, truth0, visit);
  for (const auto& s : res.series) save_series(s, dir / ("series_" + safe_name(s.filter_label) + ".csv"));
  for (const auto& s : res.series) {
    std::printf("%-14s final err_total = %.6e  err_low = %.6e\n", s.filter_label.c_str(), s.records.back().err_total,
                s.records.back().err_low);
  }
}

void run_sweep_verb(const RunConfig& c, const fs::path& dir, bool infinite) {
  TwinConfig tc = make_twin_config(c);
  const std::vector<double> mus = parse_number_list(c.mus);
  const FlowState truth0 = truth_for(c, dir);
  const SweepResult r = infinite ? sweep_mu_infinite(tc, truth0, mus) : sweep_mu_zero(tc, truth0, mus);
  write_file(dir / "summary.csv", [&](std::ostream& out) { write_sweep_summary(out, r); });
  for (const auto& [label, s] : r.entries) save_series(s, dir / ("series_" + safe_name(label) + ".csv"));
  for (const auto& [label, s] : r.reference_entries) {
    save_series(s, dir / ("vs_" + safe_name(r.reference_label) + "_" + safe_name(label) + ".csv"));
  }
  std::printf("reference %s; log-log slope %.4f; summary %s\n", r.reference_label.c_str(), r.fit_slope,
              (dir / "summary.csv").string().c_str());
}

void run_ensemble_verb(const RunConfig& c, const fs::path& dir) {
  const TwinConfig tc = make_twin_config(c);
  const FlowState truth0 = truth_for(c, dir);
  const EnsembleResult r = run_noisy_ensemble(tc, truth0, c.trials);
  for (const auto& es : r.filters) {
    write_file(dir / ("ensemble_" + safe_name(es.label) + ".csv"), [&](std::ostream& out) {
      out << "time,err_low,err_high,err_total,mu_active,p10_total,p90_total\n";
      char buf[256];
      for (std::size_t j = 0; j < es.mean.records.size(); ++j) {
        const auto& m = es.mean.records[j];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.time, m.err_low, m.err_high,
                      m.err_total, m.mu_active, es.p10_total[j], es.p90_total[j]);
        out << buf;
      }
    });
    std::printf("%-14s final mean err_total = %.6e\n", es.label.c_str(), es.mean.records.back().err_total);
  }
}

void run_spectrum_verb(const RunConfig& c, const fs::path& dir, const std::string& snapshot_path) {
  const std::string path = snapshot_path.empty() ? c.initial_snapshot : snapshot_path;
  if (path.empty()) throw UsageError("spectrum needs --snapshot or initial_snapshot");
  const Snapshot snap = load_snapshot(path);
  const ShellSpectrum spec = energy_spectrum(snap.psi);
  write_file(dir / "spectrum.csv", [&](std::ostream& out) {
    out << "shell,energy\n";
    char buf[64];
    for (const auto& s : spec.shells) {
      std::snprintf(buf, sizeof buf, "%d,%.17g\n", s.index, s.energy);
      out << buf;
    }
  });
  std::printf("t = %g: %zu shells, total energy %.6g\n", snap.time, spec.shells.size(), spec.total());
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Continuous data assimilation for 2D Navier-Stokes: spin-up, twin runs, mu sweeps, ensembles"};
  app.footer(keys_help());
  app.add_option("verb", o.verb, "spinup | twin | sweep-inf | sweep-zero | ensemble | spectrum")
      ->required()
      ->check(CLI::IsMember({"spinup", "twin", "sweep-inf", "sweep-zero", "ensemble", "spectrum"}));
  app.add_option("--preset", o.preset, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--config", o.config_path, "key = value config file applied over the preset");
  app.add_option("--set", o.sets, "key=value override, repeatable");
  app.add_option("--out", o.out, "output directory (created if absent)");
  app.add_option("--seed", o.seed, "sets obs_seed and the ensemble base seed");
  app.add_option("--mus", o.mus, "comma-separated nudging parameters for sweeps");
  app.add_option("--filter", o.filters, "sync | free | adaptive | mu=<value>, repeatable");
  app.add_option("--n-obs", o.n_obs, "observation radius [wavenumber]");
  app.add_option("--noise-sigma", o.noise_sigma, "noise standard deviation [noise_units]");
  app.add_option("--t-end", o.t_end, "assimilation span; spin-up end time for spinup [time]");
  app.add_option("--dt", o.dt, "time step [time]");
  app.add_option("--jobs", o.jobs, "worker threads (1 = bitwise reproducible)");
  app.add_flag("--force", o.force, "overwrite an existing manifest");
  app.add_option("--snapshot", o.snapshot, "snapshot file for spectrum");
  app.add_flag("--obs-log", o.obs_log, "twin: also write every observation to observations.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  fs::path dir = o.out;
  double nu = 0.0;
  try {
    const RunConfig c = resolve_config(o);
    nu = c.nu;
    make_solver_config(c);
    fs::create_directories(dir);
    if (fs::exists(dir / "manifest.txt") && !o.force) {
      throw UsageError("refusing to overwrite " + (dir / "manifest.txt").string() + " (use --force)");
    }
    write_manifest(dir, o, c, argc, argv);

    if (o.verb == "spinup") {
      run_spinup(c, dir);
    } else if (o.verb == "twin") {
      run_twin_verb(c, dir, o.obs_log);
    } else if (o.verb == "sweep-inf") {
      run_sweep_verb(c, dir, true);
    } else if (o.verb == "sweep-zero") {
      run_sweep_verb(c, dir, false);
    } else if (o.verb == "ensemble") {
      run_ensemble_verb(c, dir);
    } else {
      run_spectrum_verb(c, dir, o.snapshot);
    }
  } catch (const BlowUpError& e) {
    if (e.field()) {
      try {
        save_snapshot(Snapshot{*e.field(), e.time(), nu}, dir / "blowup.cdaf");
      } catch (const std::exception&) {
      }
    }
    std::fprintf(stderr, "cdasim: %s\n", e.what());
    return kBlowUp;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "cdasim: %s\n", e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "cdasim: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cdasim: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
