#include "oamjrc/block_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "oamjrc/errors.hpp"

namespace oamjrc {

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  std::array<unsigned char, sizeof(T)> raw{};
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  os.write(reinterpret_cast<const char*>(raw.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> raw{};
  if (!is.read(reinterpret_cast<char*>(raw.data()), sizeof(T)))
    throw IoError("snapshot file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

}  // namespace

void write_block(std::ostream& os, const SnapshotBlock& b) {
  if (b.data.rows() != b.rows()) throw IoError("snapshot block shape does not match S*M*N");
  os.write("OAMJ", 4);
  put_le<std::uint32_t>(os, kBlockFormatVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.S));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.M));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.N));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.L()));
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(b.kind));
  put_le<double>(os, b.noise_power);
  put_le<std::uint64_t>(os, b.seed);
  for (Index t = 0; t < b.data.cols(); ++t)
    for (Index r = 0; r < b.data.rows(); ++r) {
      put_le<double>(os, b.data(r, t).real());
      put_le<double>(os, b.data(r, t).imag());
    }
  if (!os) throw IoError("failed writing snapshot block");
}

SnapshotBlock read_block(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "OAMJ", 4) != 0)
    throw IoError("not a snapshot file (bad magic)");
  const auto version = get_le<std::uint32_t>(is);
  if (version != kBlockFormatVersion)
    throw IoError("unsupported snapshot file version " + std::to_string(version));

  SnapshotBlock b;
  b.S = static_cast<int>(get_le<std::uint32_t>(is));
  b.M = static_cast<int>(get_le<std::uint32_t>(is));
  b.N = static_cast<int>(get_le<std::uint32_t>(is));
  const auto L = static_cast<Index>(get_le<std::uint32_t>(is));
  const auto kind = get_le<std::uint8_t>(is);
  if (kind > static_cast<std::uint8_t>(FrameKind::CoherentCpi))
    throw IoError("unknown frame kind " + std::to_string(kind));
  b.kind = static_cast<FrameKind>(kind);
  b.noise_power = get_le<double>(is);
  b.seed = get_le<std::uint64_t>(is);
  if (b.S <= 0 || b.M <= 0 || b.N <= 0 || L <= 0) throw IoError("snapshot file has empty shape");

  b.data.resize(b.rows(), L);
  for (Index t = 0; t < L; ++t)
    for (Index r = 0; r < b.data.rows(); ++r) {
      const double re = get_le<double>(is);
      const double im = get_le<double>(is);
      b.data(r, t) = cdouble(re, im);
    }
  return b;
}

void write_block(const std::filesystem::path& path, const SnapshotBlock& block) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_block(os, block);
}

SnapshotBlock read_block(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_block(is);
}

}  // namespace oamjrc
