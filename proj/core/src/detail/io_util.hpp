#pragma once

// Little-endian binary stream helpers shared by the three file containers
// (feature maps, sparse tensors, network weights).

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sncnet/error.hpp"

namespace sncnet::detail {

// The containers are defined little-endian and the bulk reads below rely on
// the host matching; a big-endian port would add byte swaps here.
static_assert(std::endian::native == std::endian::little,
              "binary containers assume a little-endian host");

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  return is;
}

inline void put_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!os) throw IoError("write failed");
}

inline void put_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, &v, 4); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_bytes(os, &v, 8); }
inline void put_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }
inline void put_f32(std::ostream& os, float v) { put_bytes(os, &v, 4); }

inline void put_f32_array(std::ostream& os, std::span<const float> a) {
  put_bytes(os, a.data(), a.size() * 4);
}

inline void get_bytes(std::istream& is, void* data, std::size_t n,
                      const char* what) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw TruncationError(std::string("truncated payload while reading ") + what);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  std::uint32_t v;
  get_bytes(is, &v, 4, what);
  return v;
}

inline std::uint64_t get_u64(std::istream& is, const char* what) {
  std::uint64_t v;
  get_bytes(is, &v, 8, what);
  return v;
}

inline std::uint8_t get_u8(std::istream& is, const char* what) {
  std::uint8_t v;
  get_bytes(is, &v, 1, what);
  return v;
}

inline float get_f32(std::istream& is, const char* what) {
  float v;
  get_bytes(is, &v, 4, what);
  return v;
}

inline void get_f32_array(std::istream& is, std::span<float> a, const char* what) {
  get_bytes(is, a.data(), a.size() * 4, what);
}

inline void put_magic(std::ostream& os, const char magic[4]) {
  put_bytes(os, magic, 4);
}

inline void expect_magic(std::istream& is, const char magic[4]) {
  char found[4];
  get_bytes(is, found, 4, "magic");
  if (std::memcmp(found, magic, 4) != 0)
    throw FormatError(std::string("bad magic, expected ") +
                      std::string(magic, 4));
}

inline void expect_version(std::istream& is, std::uint32_t version) {
  const std::uint32_t found = get_u32(is, "version");
  if (found != version)
    throw FormatError("unsupported format version " + std::to_string(found));
}

} // namespace sncnet::detail
