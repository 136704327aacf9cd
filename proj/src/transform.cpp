#include "cdasim/transform.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <utility>

#include "cdasim/error.hpp"

namespace cdasim {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t count) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * count));
  if (p == nullptr) throw Error("fftw_malloc failed");
  return std::unique_ptr<T[], FftwFree>(p);
}

// (-1)^(kx+ky): shifts the sample origin from 0 to -pi. Parity of the
// storage index equals parity of the wavenumber because N is even.
inline double origin_sign(int ix, int iy) { return ((ix + iy) & 1) ? -1.0 : 1.0; }

}  // namespace

struct FourierTransform::Plans {
  std::unique_ptr<double[], FftwFree> real;
  std::unique_ptr<fftw_complex[], FftwFree> half;
  std::unique_ptr<fftw_complex[], FftwFree> full;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan c2c = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    if (c2c) fftw_destroy_plan(c2c);
  }
};

FourierTransform::FourierTransform(int resolution) : n_(resolution), plans_(std::make_unique<Plans>()) {
  GridSpec{resolution}.validate();
  const std::size_t n = static_cast<std::size_t>(n_);
  const std::size_t hc = n / 2 + 1;
  plans_->real = fftw_buffer<double>(n * n);
  plans_->half = fftw_buffer<fftw_complex>(n * hc);
  plans_->full = fftw_buffer<fftw_complex>(n * n);
  // FFTW_ESTIMATE keeps plan selection, and so the rounding, reproducible.
  std::lock_guard lock(planner_mutex());
  plans_->r2c = fftw_plan_dft_r2c_2d(n_, n_, plans_->real.get(), plans_->half.get(), FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r_2d(n_, n_, plans_->half.get(), plans_->real.get(), FFTW_ESTIMATE);
  plans_->c2c = fftw_plan_dft_2d(n_, n_, plans_->full.get(), plans_->full.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans_->r2c || !plans_->c2r || !plans_->c2c) throw Error("FFTW plan creation failed");
}

FourierTransform::~FourierTransform() = default;

void FourierTransform::forward(const double* physical, Complex* spectral) {
  const int n = n_;
  const int hc = n / 2 + 1;
  std::memcpy(plans_->real.get(), physical, sizeof(double) * n * n);
  fftw_execute(plans_->r2c);
  const double scale = 1.0 / (static_cast<double>(n) * n);
  const fftw_complex* half = plans_->half.get();
  for (int iy = 0; iy < n; ++iy) {
    Complex* row = spectral + static_cast<std::size_t>(iy) * n;
    const fftw_complex* hrow = half + static_cast<std::size_t>(iy) * hc;
    for (int ix = 0; ix <= n / 2; ++ix) {
      const double s = scale * origin_sign(ix, iy);
      row[ix] = Complex(s * hrow[ix][0], s * hrow[ix][1]);
    }
  }
  // The kx = 0 and kx = -N/2 columns are their own mirrors in kx; make the
  // ky pairs exact conjugates there too.
  for (int ix : {0, n / 2}) {
    for (int iy = n / 2 + 1; iy < n; ++iy) {
      spectral[static_cast<std::size_t>(iy) * n + ix] = std::conj(spectral[static_cast<std::size_t>(n - iy) * n + ix]);
    }
  }
  // Negative kx from the mirror (-kx, -ky).
  for (int iy = 0; iy < n; ++iy) {
    const int iym = (n - iy) % n;
    Complex* row = spectral + static_cast<std::size_t>(iy) * n;
    const Complex* mrow = spectral + static_cast<std::size_t>(iym) * n;
    for (int ix = n / 2 + 1; ix < n; ++ix) row[ix] = std::conj(mrow[n - ix]);
  }
}

void FourierTransform::inverse(const Complex* spectral, double* physical) {
  const int n = n_;
  const int hc = n / 2 + 1;
  fftw_complex* half = plans_->half.get();
  for (int iy = 0; iy < n; ++iy) {
    const Complex* row = spectral + static_cast<std::size_t>(iy) * n;
    fftw_complex* hrow = half + static_cast<std::size_t>(iy) * hc;
    for (int ix = 0; ix <= n / 2; ++ix) {
      const double s = origin_sign(ix, iy);
      hrow[ix][0] = s * row[ix].real();
      hrow[ix][1] = s * row[ix].imag();
    }
  }
  fftw_execute(plans_->c2r);
  std::memcpy(physical, plans_->real.get(), sizeof(double) * n * n);
}

void FourierTransform::inverse_complex(const Complex* spectral, Complex* physical) {
  const int n = n_;
  fftw_complex* full = plans_->full.get();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
      const double s = origin_sign(ix, iy);
      full[i][0] = s * spectral[i].real();
      full[i][1] = s * spectral[i].imag();
    }
  }
  fftw_execute(plans_->c2c);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n) * n; ++i) physical[i] = Complex(full[i][0], full[i][1]);
}

FourierTransform& fourier(int resolution) {
  thread_local std::map<int, std::unique_ptr<FourierTransform>> cache;
  auto& slot = cache[resolution];
  if (!slot) slot = std::make_unique<FourierTransform>(resolution);
  return *slot;
}

SpectralField forward_transform(const PhysicalField& physical) {
  physical.grid.validate();
  if (physical.values.size() != physical.grid.size()) {
    throw Error("physical field has " + std::to_string(physical.values.size()) + " samples, grid expects " +
                std::to_string(physical.grid.size()));
  }
  SpectralField out(physical.grid);
  fourier(physical.grid.resolution).forward(physical.values.data(), out.coeffs().data());
  return out;
}

PhysicalField inverse_transform(const SpectralField& field) {
  PhysicalField out(field.grid());
  fourier(field.resolution()).inverse(field.coeffs().data(), out.values.data());
  return out;
}

std::vector<Complex> inverse_transform_complex(const SpectralField& field) {
  std::vector<Complex> out(field.size());
  fourier(field.resolution()).inverse_complex(field.coeffs().data(), out.data());
  return out;
}

const Lattice& lattice(const GridSpec& grid) {
  thread_local std::map<std::pair<int, double>, Lattice> cache;
  const auto key = std::make_pair(grid.resolution, grid.dealias_fraction);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  grid.validate();
  Lattice lat;
  const int n = grid.resolution;
  const double cutoff = grid.dealias_cutoff();
  lat.kx.resize(grid.size());
  lat.ky.resize(grid.size());
  lat.k2.resize(grid.size());
  lat.retained.resize(grid.size());
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
      const int kx = grid.wavenumber(ix);
      const int ky = grid.wavenumber(iy);
      lat.kx[i] = kx;
      lat.ky[i] = ky;
      lat.k2[i] = static_cast<double>(Wavenumber{kx, ky}.norm2());
      lat.retained[i] = (std::abs(kx) <= cutoff && std::abs(ky) <= cutoff) ? 1 : 0;
    }
  }
  return cache.emplace(key, std::move(lat)).first->second;
}

}  // namespace cdasim
