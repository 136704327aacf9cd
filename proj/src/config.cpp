#include "cdasim/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cdasim/error.hpp"
#include "cdasim/snapshot.hpp"

namespace cdasim {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, v);
  if (t.empty() || r.ec != std::errc() || r.ptr != end) {
    throw ConfigError("bad number for " + std::string(key) + ": '" + t + "'");
  }
  return v;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  Int v = 0;
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, v);
  if (t.empty() || r.ec != std::errc() || r.ptr != end) {
    throw ConfigError("bad integer for " + std::string(key) + ": '" + t + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("bad boolean for " + std::string(key) + ": '" + t + "'");
}

struct Entry {
  ConfigKey key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Entry make_entry(std::string name, std::string unit, std::string help, T RunConfig::*member) {
  Entry e{{name, std::move(unit), std::move(help)}, {}, {}};
  e.set = [name, member](RunConfig& c, std::string_view v) {
    if constexpr (std::is_same_v<T, double>) {
      c.*member = to_double(name, v);
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*member = to_bool(name, v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      c.*member = trim(v);
    } else {
      c.*member = to_int<T>(name, v);
    }
  };
  e.get = [member](const RunConfig& c) -> std::string {
    if constexpr (std::is_same_v<T, double>) {
      return fmt_double(c.*member);
    } else if constexpr (std::is_same_v<T, bool>) {
      return c.*member ? "true" : "false";
    } else if constexpr (std::is_same_v<T, std::string>) {
      return c.*member;
    } else {
      return std::to_string(c.*member);
    }
  };
  return e;
}

Entry choice_entry(std::string name, std::string unit, std::string help, std::string RunConfig::*member,
                   std::initializer_list<std::string_view> allowed) {
  Entry e = make_entry(name, std::move(unit), std::move(help), member);
  std::vector<std::string> opts(allowed.begin(), allowed.end());
  e.set = [name, member, opts](RunConfig& c, std::string_view v) {
    const std::string t = trim(v);
    for (const auto& o : opts) {
      if (t == o) {
        c.*member = t;
        return;
      }
    }
    std::string list;
    for (const auto& o : opts) list += (list.empty() ? "" : "|") + o;
    throw ConfigError(name + " must be one of " + list + ", got '" + t + "'");
  };
  return e;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(make_entry("resolution", "grid points per side", "collocation grid size N (even)",
                           &RunConfig::resolution));
    t.push_back(make_entry("dealias_fraction", "fraction of N/2", "square dealias mask max(|kx|,|ky|) <= f N/2",
                           &RunConfig::dealias_fraction));
    t.push_back(make_entry("nu", "length^2/time", "kinematic viscosity", &RunConfig::nu));
    t.push_back(make_entry("dt", "time", "time step", &RunConfig::dt));
    t.push_back(make_entry("grashof", "dimensionless", "Grashof number G = |f| / nu^2", &RunConfig::grashof));
    t.push_back(make_entry("forcing_band_lo", "|k|^2", "lowest forced shell", &RunConfig::forcing_band_lo));
    t.push_back(make_entry("forcing_band_hi", "|k|^2", "highest forced shell", &RunConfig::forcing_band_hi));
    t.push_back(make_entry("forcing_seed", "integer", "seed of the forcing phases", &RunConfig::forcing_seed));
    t.push_back(make_entry("spinup_t_end", "time", "spin-up end time", &RunConfig::spinup_t_end));
    t.push_back(make_entry("energy_every", "steps", "spin-up energy CSV interval", &RunConfig::energy_every));
    t.push_back(make_entry("initial_snapshot", "path",
                           "truth initial state; empty spins up from rest to spinup_t_end",
                           &RunConfig::initial_snapshot));
    t.push_back(make_entry("n_obs", "wavenumber", "observation radius: modes with 0 < |k| <= n_obs",
                           &RunConfig::n_obs));
    t.push_back(make_entry("noise_sigma", "noise_units", "per-component noise standard deviation",
                           &RunConfig::noise_sigma));
    t.push_back(choice_entry("noise_units", "dft|coefficient",
                             "dft: sigma of raw DFT entries (N^2 c_k); coefficient: sigma of c_k",
                             &RunConfig::noise_units, {"dft", "coefficient"}));
    t.push_back(make_entry("noise_white", "bool", "scale sigma by 1/sqrt(dt)", &RunConfig::noise_white));
    t.push_back(make_entry("obs_seed", "integer", "observation noise seed", &RunConfig::obs_seed));
    t.push_back(make_entry("t_end", "time", "assimilation span after the truth's start time",
                           &RunConfig::t_end));
    t.push_back(choice_entry("init_mode", "from_observation|zero|truth_copy", "filter initial condition",
                             &RunConfig::init_mode, {"from_observation", "zero", "truth_copy"}));
    t.push_back(make_entry("checkpoint_every", "steps", "error record interval", &RunConfig::checkpoint_every));
    t.push_back(make_entry("filters", "list", "twin/ensemble filters: sync, free, mu=<value>, adaptive",
                           &RunConfig::filters));
    t.push_back(make_entry("mus", "list of 1/time", "nudging parameters for sweeps", &RunConfig::mus));
    t.push_back(choice_entry("feedback_timing", "next|current", "observation time entering the feedback",
                             &RunConfig::feedback_timing, {"next", "current"}));
    t.push_back(make_entry("adaptive_mu0", "1/time", "adaptive controller starting mu", &RunConfig::adaptive_mu0));
    t.push_back(make_entry("adaptive_window", "steps", "adaptive controller look-back",
                           &RunConfig::adaptive_window));
    t.push_back(make_entry("adaptive_tol", "1/time", "error growth rate that triggers a decade drop",
                           &RunConfig::adaptive_tol));
    t.push_back(make_entry("adaptive_mu_floor", "1/time", "smallest mu the controller may reach",
                           &RunConfig::adaptive_mu_floor));
    t.push_back(make_entry("trials", "count", "ensemble size", &RunConfig::trials));
    t.push_back(make_entry("seed", "integer", "base seed for ensemble trial noise", &RunConfig::seed));
    t.push_back(make_entry("jobs", "threads", "worker cap; 1 is bitwise reproducible", &RunConfig::jobs));
    return t;
  }();
  return table;
}

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  std::string valid;
  for (const auto& e : entries()) valid += (valid.empty() ? "" : ", ") + e.key.name;
  throw ConfigError("unknown config key '" + std::string(key) + "'; valid keys: " + valid);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  if (name == "desk") return c;
  if (name == "paper") {
    c.resolution = 1024;
    c.nu = 1e-4;
    c.grashof = 5e5;
    c.dt = 1e-3;
    c.spinup_t_end = 10000.0;
    c.n_obs = 100.0;
    c.noise_sigma = 0.1;
    c.energy_every = 10000;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'; valid presets: desk, paper");
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  find_entry(trim(key)).set(cfg, value);
}

std::string get_setting(const RunConfig& cfg, std::string_view key) { return find_entry(key).get(cfg); }

void apply_config_text(RunConfig& cfg, std::istream& in) {
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  apply_config_text(cfg, in);
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& e : entries()) out << e.key.name << " = " << e.get(cfg) << '\n';
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::string tok;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw ConfigError("empty entry in number list '" + std::string(text) + "'");
    out.push_back(to_double("list", tok));
  }
  return out;
}

SolverConfig make_solver_config(const RunConfig& c) {
  SolverConfig s;
  s.grid = GridSpec{c.resolution, GridSpec{}.domain_length, c.dealias_fraction};
  s.grid.validate();
  s.nu = c.nu;
  s.dt = c.dt;
  s.grashof_target = c.grashof;
  if (c.grashof > 0.0) {
    s.forcing = make_band_forcing(s.grid, c.forcing_band_lo, c.forcing_band_hi, c.grashof, c.nu, c.forcing_seed);
  } else {
    s.forcing = SpectralField(s.grid);
  }
  s.validate();
  return s;
}

ObservationSpec make_observation_spec(const RunConfig& c) {
  ObservationSpec o;
  o.n_obs = c.n_obs;
  o.noise_sigma = c.noise_sigma;
  o.seed = c.obs_seed;
  o.units = c.noise_units == "coefficient" ? NoiseUnits::Coefficient : NoiseUnits::Dft;
  o.white_in_time = c.noise_white;
  return o;
}

std::vector<FilterParams> make_filters(const RunConfig& c) {
  const FeedbackTiming timing = c.feedback_timing == "current" ? FeedbackTiming::Current : FeedbackTiming::Next;
  std::vector<FilterParams> out;
  for (const auto& tok : split_list(c.filters)) {
    FilterParams p;
    p.label = tok;
    p.timing = timing;
    if (tok == "sync") {
      p.kind = FilterKind::Synchronization;
    } else if (tok == "free") {
      p.kind = FilterKind::FreeRun;
    } else if (tok == "adaptive") {
      p.kind = FilterKind::Nudging;
      p.mu = c.adaptive_mu0;
      p.adaptive = AdaptiveSettings{c.adaptive_mu0, c.adaptive_window, c.adaptive_tol, c.adaptive_mu_floor};
    } else if (tok.rfind("mu=", 0) == 0) {
      p.kind = FilterKind::Nudging;
      p.mu = to_double("filters", tok.substr(3));
      p.label = mu_label(p.mu);
    } else {
      throw ConfigError("unknown filter '" + tok + "'; expected sync, free, adaptive or mu=<value>");
    }
    p.obs = make_observation_spec(c);
    out.push_back(std::move(p));
  }
  if (out.empty()) throw ConfigError("filters list is empty");
  return out;
}

TwinConfig make_twin_config(const RunConfig& c) {
  TwinConfig t;
  t.solver = make_solver_config(c);
  t.obs = make_observation_spec(c);
  t.filters = make_filters(c);
  t.t_end = c.t_end;
  t.init_mode = c.init_mode == "zero"         ? InitMode::Zero
                : c.init_mode == "truth_copy" ? InitMode::TruthCopy
                                              : InitMode::FromObservation;
  t.checkpoint_every = c.checkpoint_every;
  t.seed = c.seed;
  t.jobs = c.jobs;
  t.validate();
  return t;
}

FlowState initial_truth(const RunConfig& c, const EnergyCallback& on_checkpoint) {
  const SolverConfig solver = make_solver_config(c);
  if (!c.initial_snapshot.empty()) {
    Snapshot snap = load_snapshot(c.initial_snapshot);
    if (!(snap.psi.grid() == solver.grid)) {
      throw ConfigError("initial_snapshot resolution " + std::to_string(snap.psi.resolution()) +
                        " does not match resolution " + std::to_string(c.resolution));
    }
    if (std::abs(snap.nu - c.nu) > 1e-12 * std::abs(c.nu)) {
      throw ConfigError("initial_snapshot was produced with nu = " + fmt_double(snap.nu) + ", config has nu = " +
                        fmt_double(c.nu));
    }
    return FlowState{std::move(snap.psi), snap.time};
  }
  return spinup(solver, c.spinup_t_end, FlowState{}, on_checkpoint, c.energy_every);
}

}  // namespace cdasim
