#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "angkit/errors.hpp"

// Little-endian primitives shared by the tensor and checkpoint containers.
namespace angkit::binio {

static_assert(std::endian::native == std::endian::little, "only little-endian hosts are supported");

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

inline void put_f32(std::ostream& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

inline void put_f64(std::ostream& out, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.write(b, 8);
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw FormatError(std::string("truncated ") + what);
}

inline std::uint32_t get_u32(std::istream& in, const char* what) {
  char b[4];
  read_exact(in, b, 4, what);
  std::uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

inline float get_f32(std::istream& in, const char* what) {
  char b[4];
  read_exact(in, b, 4, what);
  float v;
  std::memcpy(&v, b, 4);
  return v;
}

inline double get_f64(std::istream& in, const char* what) {
  char b[8];
  read_exact(in, b, 8, what);
  double v;
  std::memcpy(&v, b, 8);
  return v;
}

}  // namespace angkit::binio
