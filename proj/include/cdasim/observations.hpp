#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>

#include "cdasim/nse.hpp"
#include "cdasim/spectral_field.hpp"

namespace cdasim {

/// Scale in which noise_sigma is expressed.
///   Coefficient: standard deviation of the normalized coefficients c_k.
///   Dft: standard deviation of the raw (unnormalized) DFT matrix entries,
///        i.e. of N^2 c_k, the convention of an fft2-based code.
enum class NoiseUnits { Coefficient, Dft };

struct ObservationSpec {
  double n_obs = 20.0;        // projection radius N of P_N
  double noise_sigma = 0.0;   // per-component standard deviation; 0 = exact
  std::uint64_t seed = 0;
  NoiseUnits units = NoiseUnits::Dft;
  bool white_in_time = false;  // scale sigma by 1/sqrt(dt)

  /// Throws if n_obs is negative or exceeds the largest retained |k|.
  void validate(const GridSpec& grid) const;

  /// Standard deviation applied to each coefficient component.
  double coefficient_sigma(const GridSpec& grid, double dt) const;
};

/// Largest |k| kept by the dealias mask.
double max_retained_radius(const GridSpec& grid);

struct Observation {
  double time = 0.0;
  SpectralField low_modes;
};

/// P_N of the truth stream function.
Observation observe(const FlowState& truth, const ObservationSpec& spec);

/// Independent complex Gaussians (real and imaginary parts each with the
/// coefficient sigma) on 1 <= |k| <= n_obs, before symmetrization.
SpectralField gen_raw_noise(const GridSpec& grid, const ObservationSpec& spec, std::mt19937_64& rng, double dt);

/// eta(k) <- (eta(k) + conj(eta(-k))) / 2. Self-conjugate wavenumbers keep
/// their real part only.
SpectralField symmetrize_noise(const SpectralField& raw);

/// gen_raw_noise followed by symmetrize_noise.
SpectralField gen_noise(const GridSpec& grid, const ObservationSpec& spec, std::mt19937_64& rng, double dt);

/// observe() plus fresh noise, restricted to the observed ball.
Observation noisy_observe(const FlowState& truth, const ObservationSpec& spec, std::mt19937_64& rng, double dt);

/// Observation log: header "time,kx,ky,re,im", one row per observed
/// coefficient (both members of each conjugate pair), rows grouped by time.
class ObservationLogWriter {
 public:
  ObservationLogWriter(std::ostream& out, double n_obs);
  void write(const Observation& obs);

 private:
  std::ostream& out_;
  double n_obs_;
};

class ObservationLogReader {
 public:
  ObservationLogReader(std::istream& in, const GridSpec& grid);
  /// Next logged observation, or nullopt at end of file.
  std::optional<Observation> next();

 private:
  std::istream& in_;
  GridSpec grid_;
  long line_no_ = 1;
  std::optional<std::string> pending_;
};

}  // namespace cdasim
