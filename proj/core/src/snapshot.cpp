#include "nsv/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "nsv/error.hpp"

namespace nsv {

namespace {

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
void put(std::ofstream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::string& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated snapshot: " + path);
  return to_little(v);
}

}  // namespace

void write_snapshot(const std::string& path, const SpectralField& u) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open snapshot for writing: " + path);
  os.write("NSVF", 4);
  put<std::uint32_t>(os, kSnapshotVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid_size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(u.k_max()));
  for (const auto& k : canonical_modes(u.k_max()))
    for (int c = 0; c < 2; ++c) {
      put<double>(os, u.at(c, k.kx, k.ky).real());
      put<double>(os, u.at(c, k.kx, k.ky).imag());
    }
  if (!os) throw IoError("failed writing snapshot: " + path);
}

SpectralField read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open snapshot: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "NSVF", 4) != 0) throw IoError("bad snapshot magic: " + path);
  const auto version = get<std::uint32_t>(is, path);
  if (version != kSnapshotVersion) throw IoError("unsupported snapshot version " + std::to_string(version));
  const auto n = get<std::uint32_t>(is, path);
  const auto k = get<std::uint32_t>(is, path);
  SpectralField u(static_cast<int>(n), static_cast<int>(k));
  for (const auto& kv : canonical_modes(static_cast<int>(k)))
    for (int c = 0; c < 2; ++c) {
      const double re = get<double>(is, path);
      const double im = get<double>(is, path);
      u.at(c, kv.kx, kv.ky) = Complex(re, im);
    }
  return u;
}

}  // namespace nsv
