#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace countfuse::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are read and written assuming a little-endian host");

template <typename T>
void write_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

/// Returns false on short read.
template <typename T>
bool read_le(std::istream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

inline bool read_bytes(std::istream& in, std::string& out, std::size_t n) {
  out.resize(n);
  return n == 0 || static_cast<bool>(in.read(out.data(), static_cast<std::streamsize>(n)));
}

}  // namespace countfuse::detail
