#include "cdasim/observations.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "cdasim/error.hpp"
#include "cdasim/spectral_ops.hpp"
#include "cdasim/transform.hpp"

namespace cdasim {

double max_retained_radius(const GridSpec& grid) {
  const double kmax = std::floor(grid.dealias_cutoff());
  return std::sqrt(2.0) * kmax;
}

void ObservationSpec::validate(const GridSpec& grid) const {
  if (!(n_obs >= 0.0)) throw Error("n_obs must be nonnegative");
  if (n_obs > max_retained_radius(grid) + 1e-9) {
    throw Error("n_obs beyond dealiasing cutoff: " + std::to_string(n_obs) + " > " +
                std::to_string(max_retained_radius(grid)));
  }
  if (!(noise_sigma >= 0.0)) throw Error("noise_sigma must be nonnegative");
}

double ObservationSpec::coefficient_sigma(const GridSpec& grid, double dt) const {
  double s = noise_sigma;
  if (units == NoiseUnits::Dft) s /= static_cast<double>(grid.resolution) * grid.resolution;
  if (white_in_time) {
    if (!(dt > 0.0)) throw Error("white-in-time noise needs a positive dt");
    s /= std::sqrt(dt);
  }
  return s;
}

Observation observe(const FlowState& truth, const ObservationSpec& spec) {
  spec.validate(truth.psi.grid());
  return Observation{truth.time, project_low(truth.psi, spec.n_obs)};
}

SpectralField gen_raw_noise(const GridSpec& grid, const ObservationSpec& spec, std::mt19937_64& rng, double dt) {
  spec.validate(grid);
  SpectralField eta(grid);
  const double sigma = spec.coefficient_sigma(grid, dt);
  if (sigma == 0.0) return eta;
  std::normal_distribution<double> normal(0.0, sigma);
  const Lattice& lat = lattice(grid);
  for (std::size_t i = 1; i < eta.size(); ++i) {
    if (!lat.retained[i] || !in_ball(static_cast<long long>(lat.k2[i]), spec.n_obs)) continue;
    const double re = normal(rng);
    const double im = normal(rng);
    eta[i] = Complex(re, im);
  }
  return eta;
}

SpectralField symmetrize_noise(const SpectralField& raw) {
  const GridSpec& g = raw.grid();
  const int h = g.resolution / 2;
  SpectralField out(g);
  for (int ky = -h; ky < h; ++ky) {
    for (int kx = -h; kx < h; ++kx) {
      const Complex a = raw.at(kx, ky);
      const bool mirror_ok = (-kx < h) && (-ky < h);
      if (!mirror_ok || (kx == 0 && ky == 0)) {
        out.at(kx, ky) = Complex(a.real(), 0.0);
        continue;
      }
      out.at(kx, ky) = 0.5 * (a + std::conj(raw.at(-kx, -ky)));
    }
  }
  out.pin_mean();
  return out;
}

SpectralField gen_noise(const GridSpec& grid, const ObservationSpec& spec, std::mt19937_64& rng, double dt) {
  return symmetrize_noise(gen_raw_noise(grid, spec, rng, dt));
}

Observation noisy_observe(const FlowState& truth, const ObservationSpec& spec, std::mt19937_64& rng, double dt) {
  Observation obs = observe(truth, spec);
  if (spec.noise_sigma > 0.0) {
    obs.low_modes += gen_noise(truth.psi.grid(), spec, rng, dt);
    obs.low_modes = project_low(obs.low_modes, spec.n_obs);
  }
  return obs;
}

ObservationLogWriter::ObservationLogWriter(std::ostream& out, double n_obs) : out_(out), n_obs_(n_obs) {
  out_ << "time,kx,ky,re,im\n";
}

void ObservationLogWriter::write(const Observation& obs) {
  const GridSpec& g = obs.low_modes.grid();
  const int h = g.resolution / 2;
  char line[160];
  for (int ky = -h; ky < h; ++ky) {
    for (int kx = -h; kx < h; ++kx) {
      if ((kx == 0 && ky == 0) || !in_ball(Wavenumber{kx, ky}.norm2(), n_obs_)) continue;
      const Complex c = obs.low_modes.at(kx, ky);
      std::snprintf(line, sizeof line, "%.17g,%d,%d,%.17g,%.17g\n", obs.time, kx, ky, c.real(), c.imag());
      out_ << line;
    }
  }
  if (!out_) throw Error("failed writing observation log");
}

ObservationLogReader::ObservationLogReader(std::istream& in, const GridSpec& grid) : in_(in), grid_(grid) {
  std::string header;
  if (!std::getline(in_, header) || header != "time,kx,ky,re,im") {
    throw FormatError("observation log line 1: expected header \"time,kx,ky,re,im\"");
  }
}

std::optional<Observation> ObservationLogReader::next() {
  std::optional<Observation> obs;
  const int h = grid_.resolution / 2;
  while (true) {
    std::string line;
    if (pending_) {
      line = *pending_;
      pending_.reset();
    } else {
      if (!std::getline(in_, line)) break;
      ++line_no_;
    }
    if (line.empty()) continue;
    double t, re, im;
    int kx, ky;
    if (std::sscanf(line.c_str(), "%lf,%d,%d,%lf,%lf", &t, &kx, &ky, &re, &im) != 5) {
      throw FormatError("observation log line " + std::to_string(line_no_) + ": malformed row");
    }
    if (kx < -h || kx >= h || ky < -h || ky >= h) {
      throw FormatError("observation log line " + std::to_string(line_no_) + ": wavenumber outside grid");
    }
    if (obs && t != obs->time) {
      pending_ = line;
      break;
    }
    if (!obs) obs = Observation{t, SpectralField(grid_)};
    obs->low_modes.at(kx, ky) = Complex(re, im);
  }
  return obs;
}

}  // namespace cdasim
