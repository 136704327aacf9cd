#pragma once

#include <filesystem>
#include <iosfwd>

#include "cdasim/spectral_field.hpp"

namespace cdasim {

/// Binary snapshot of a stream function.
///
/// Layout (little-endian): 5-byte magic "CDAF1", uint32 resolution,
/// float64 domain_length, float64 time, float64 nu, then resolution^2
/// (re, im) float64 pairs in row-major wavenumber order: ky ascending from
/// -N/2, and within a row kx ascending from -N/2.
struct Snapshot {
  SpectralField psi;
  double time = 0.0;
  double nu = 0.0;
};

inline constexpr char kSnapshotMagic[] = "CDAF1";

void write_snapshot(std::ostream& out, const Snapshot& snap);
/// Validates the magic string, sizes, finiteness and Hermitian symmetry.
Snapshot read_snapshot(std::istream& in);

void save_snapshot(const Snapshot& snap, const std::filesystem::path& path);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace cdasim
