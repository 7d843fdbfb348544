#pragma once

// Binary field snapshot ("BSSF"), all integers and floats little-endian:
//
//   char[4]  magic "BSSF"
//   u32      version (1)
//   u32      d
//   u32[d]   points per axis
//   f64[d]   box length per axis
//   u32      representation (0 = physical, 1 = frequency)
//   f64[2N]  interleaved (re, im) in row-major order, N = prod(points)
//
// Frequency data is stored in FFT slot order (modes 0..n/2-1, then -n/2..-1).

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"

namespace bosonstar {

inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError("truncated snapshot");
  return to_little(v);
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const SpectralField& f) {
  const auto& g = f.grid();
  os.write("BSSF", 4);
  detail::put<std::uint32_t>(os, kSnapshotVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim));
  for (int a = 0; a < g.dim; ++a) detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(g.points[a]));
  for (int a = 0; a < g.dim; ++a) detail::put<double>(os, g.lengths[a]);
  detail::put<std::uint32_t>(os, f.is_physical() ? 0u : 1u);
  for (const auto& z : f.values()) {
    detail::put<double>(os, z.real());
    detail::put<double>(os, z.imag());
  }
  if (!os) throw FormatError("failed writing snapshot");
}

inline SpectralField read_snapshot(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "BSSF", 4) != 0) throw FormatError("bad snapshot magic");
  const auto version = detail::get<std::uint32_t>(is);
  if (version != kSnapshotVersion) throw FormatError("unsupported snapshot version " + std::to_string(version));
  const auto d = static_cast<int>(detail::get<std::uint32_t>(is));
  if (d < 1 || d > 3) throw FormatError("bad snapshot dimension");
  std::array<std::size_t, 3> n{1, 1, 1};
  std::array<double, 3> len{1.0, 1.0, 1.0};
  for (int a = 0; a < d; ++a) n[a] = detail::get<std::uint32_t>(is);
  for (int a = 0; a < d; ++a) len[a] = detail::get<double>(is);
  const auto flag = detail::get<std::uint32_t>(is);
  if (flag > 1) throw FormatError("bad representation flag");
  GridSpec g;
  try {
    g = GridSpec::make(d, n, len);
  } catch (const InvalidGrid& e) {
    throw FormatError(std::string("snapshot grid invalid: ") + e.what());
  }
  std::vector<cplx> v(g.size());
  for (auto& z : v) {
    const double re = detail::get<double>(is);
    const double im = detail::get<double>(is);
    z = cplx(re, im);
  }
  return SpectralField(g, std::move(v), flag == 0 ? Representation::physical : Representation::frequency);
}

inline void save_snapshot(const std::string& path, const SpectralField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path);
  write_snapshot(os, f);
}

inline SpectralField load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace bosonstar
