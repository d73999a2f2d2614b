#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "vsid/error.hpp"

// Little-endian primitives shared by the feature and model file formats.
namespace vsid::io {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

template <typename T>
void Put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T Get(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in)
    throw Error(ErrorCode::kFormatError, std::string("truncated input reading ") + what);
  return value;
}

inline void PutString(std::ostream& out, const std::string& s) {
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string GetString(std::istream& in, const char* what,
                             std::uint32_t max_len = 1u << 20) {
  const auto len = Get<std::uint32_t>(in, what);
  if (len > max_len)
    throw Error(ErrorCode::kFormatError, std::string("implausible length for ") + what);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in)
    throw Error(ErrorCode::kFormatError, std::string("truncated input reading ") + what);
  return s;
}

inline void ExpectMagic(std::istream& in, const char (&magic)[9], const char* what) {
  char buf[8] = {};
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0)
    throw Error(ErrorCode::kFormatError,
                std::string("bad magic: not a ") + what + " file");
}

}  // namespace vsid::io
