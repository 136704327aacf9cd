#include "cdasim/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "cdasim/error.hpp"

namespace cdasim {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw FormatError(std::string("snapshot truncated while reading ") + what);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  const GridSpec& g = snap.psi.grid();
  const int n = g.resolution;
  out.write(kSnapshotMagic, 5);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  put<double>(out, g.domain_length);
  put<double>(out, snap.time);
  put<double>(out, snap.nu);
  for (int ky = -n / 2; ky < n / 2; ++ky) {
    for (int kx = -n / 2; kx < n / 2; ++kx) {
      const Complex c = snap.psi.at(kx, ky);
      put<double>(out, c.real());
      put<double>(out, c.imag());
    }
  }
  if (!out) throw Error("failed writing snapshot");
}

Snapshot read_snapshot(std::istream& in) {
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, kSnapshotMagic, 5) != 0) {
    throw FormatError("not a snapshot file: expected header magic \"CDAF1\"");
  }
  const auto n = get<std::uint32_t>(in, "resolution");
  if (n < 8 || n % 2 != 0 || n > (1u << 15)) {
    throw FormatError("snapshot resolution " + std::to_string(n) + " is not an even size in [8, 32768]");
  }
  GridSpec g;
  g.resolution = static_cast<int>(n);
  g.domain_length = get<double>(in, "domain_length");
  Snapshot snap;
  snap.time = get<double>(in, "time");
  snap.nu = get<double>(in, "nu");
  snap.psi = SpectralField(g);
  const int h = g.resolution / 2;
  for (int ky = -h; ky < h; ++ky) {
    for (int kx = -h; kx < h; ++kx) {
      const double re = get<double>(in, "coefficients");
      const double im = get<double>(in, "coefficients");
      snap.psi.at(kx, ky) = Complex(re, im);
    }
  }
  if (!snap.psi.all_finite()) throw FormatError("snapshot contains non-finite coefficients");
  const double scale = std::max(max_abs(snap.psi), 1e-300);
  const double defect = hermitian_defect(snap.psi);
  if (defect > 1e-12 * scale) {
    throw FormatError("snapshot is not Hermitian symmetric (defect " + std::to_string(defect / scale) + ")");
  }
  return snap;
}

void save_snapshot(const Snapshot& snap, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_snapshot(out, snap);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

}  // namespace cdasim
