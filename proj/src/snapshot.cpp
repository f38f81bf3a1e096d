#include "sigwave/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <ostream>

namespace sigwave {
namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'S', 'G', 'W', 'V'};

}  // namespace

void write_snapshot(std::ostream& os, const SpectralField& f) {
  std::array<char, 16> header{};
  std::memcpy(header.data(), kMagic.data(), 4);
  const std::uint16_t version = kSnapshotVersion;
  const auto n = static_cast<std::uint16_t>(f.spec().n_grid);
  std::memcpy(header.data() + 4, &version, 2);
  std::memcpy(header.data() + 6, &n, 2);
  os.write(header.data(), header.size());
  for (const Complex& c : f.coeffs()) {
    const double re = c.real();
    const double im = c.imag();
    os.write(reinterpret_cast<const char*>(&re), sizeof re);
    os.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  if (!os) throw std::runtime_error("write_snapshot: stream error");
}

SpectralField read_snapshot(std::istream& is, double mass) {
  std::array<char, 16> header{};
  is.read(header.data(), header.size());
  if (!is) throw std::runtime_error("read_snapshot: truncated header");
  if (std::memcmp(header.data(), kMagic.data(), 4) != 0) throw std::runtime_error("read_snapshot: bad magic");
  std::uint16_t version = 0;
  std::uint16_t n = 0;
  std::memcpy(&version, header.data() + 4, 2);
  std::memcpy(&n, header.data() + 6, 2);
  if (version != kSnapshotVersion) throw std::runtime_error("read_snapshot: unsupported version");
  SpectralField f(GridSpec::make(n, mass));
  for (Complex& c : f.coeffs()) {
    double re = 0.0;
    double im = 0.0;
    is.read(reinterpret_cast<char*>(&re), sizeof re);
    is.read(reinterpret_cast<char*>(&im), sizeof im);
    c = Complex(re, im);
  }
  if (!is) throw std::runtime_error("read_snapshot: truncated payload");
  return f;
}

void write_snapshots(const std::string& path, const std::vector<SpectralField>& fields) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  for (const auto& f : fields) write_snapshot(os, f);
}

std::vector<SpectralField> read_snapshots(const std::string& path, double mass) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<SpectralField> out;
  while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_snapshot(is, mass));
  return out;
}

}  // namespace sigwave
