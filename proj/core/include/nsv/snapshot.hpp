#pragma once

// Binary field snapshots.  Layout (little-endian):
//   "NSVF" | u32 version | u32 N | u32 K_max |
//   for each k in canonical_modes(K_max): f64 re(ux) f64 im(ux) f64 re(uy) f64 im(uy)

#include <cstdint>
#include <string>

#include "nsv/fields.hpp"

namespace nsv {

inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::string& path, const SpectralField& u);
SpectralField read_snapshot(const std::string& path);

}  // namespace nsv
