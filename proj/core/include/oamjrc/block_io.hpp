#pragma once

#include <filesystem>
#include <iosfwd>

#include "oamjrc/synth.hpp"

namespace oamjrc {

/// Binary snapshot file, little-endian:
///   "OAMJ" | u32 version | u32 S, M, N, L | u8 frame_kind | f64 noise_power | u64 seed
/// followed by L * S * M * N complex samples as (re, im) f64 pairs,
/// snapshot-major, rows in (s, m, n) order.
inline constexpr std::uint32_t kBlockFormatVersion = 1;

void write_block(std::ostream& os, const SnapshotBlock& block);
SnapshotBlock read_block(std::istream& is);

void write_block(const std::filesystem::path& path, const SnapshotBlock& block);
SnapshotBlock read_block(const std::filesystem::path& path);

}  // namespace oamjrc
