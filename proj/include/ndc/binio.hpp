#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "ndc/error.hpp"

namespace ndc::binio {

// Little-endian scalar encoding independent of host byte order.

inline void put_u8(std::ostream& o, std::uint8_t v) { o.put(static_cast<char>(v)); }

inline void put_u32(std::ostream& o, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  o.write(b, 4);
}

inline void put_f32(std::ostream& o, float v) { put_u32(o, std::bit_cast<std::uint32_t>(v)); }

inline void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw Error(ErrorCode::TruncatedPayload, std::string("unexpected end of data in ") + what);
}

inline std::uint8_t get_u8(std::istream& in, const char* what) {
  char c;
  read_exact(in, &c, 1, what);
  return static_cast<std::uint8_t>(c);
}

inline std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  read_exact(in, reinterpret_cast<char*>(b), 4, what);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

inline float get_f32(std::istream& in, const char* what) { return std::bit_cast<float>(get_u32(in, what)); }

}  // namespace ndc::binio
