#pragma once

// Binary field snapshots.
//
// Layout (all little-endian):
//   bytes 0..3    magic "SGWV"
//   bytes 4..5    format version (u16, currently 1)
//   bytes 6..7    n_grid (u16)
//   bytes 8..15   reserved, zero
//   then n_grid² pairs of float64 (re, im), row-major in FFT index order
//   (row k1, column k2; index k stands for mode k if k <= n_grid/2, else k - n_grid).
//
// Several records may be concatenated in one file.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sigwave/grid.hpp"

namespace sigwave {

inline constexpr std::uint16_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& os, const SpectralField& f);
/// Reads one record; the mass is not stored and must be supplied.
SpectralField read_snapshot(std::istream& is, double mass);

void write_snapshots(const std::string& path, const std::vector<SpectralField>& fields);
std::vector<SpectralField> read_snapshots(const std::string& path, double mass);

}  // namespace sigwave
