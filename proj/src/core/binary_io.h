// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <bit>
#include <cstring>
#include <utility>
#include <istream>
#include <ostream>

#include "core/errors.h"

// Little-endian scalar helpers shared by the token and checkpoint formats.
namespace past::le {

template <typename T>
void Write(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
bool TryRead(std::istream& is, T* value) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  std::memcpy(value, buf, sizeof(T));
  return true;
}

template <typename T>
T Read(std::istream& is, ErrorKind kind = ErrorKind::kData) {
  T value{};
  if (!TryRead(is, &value)) Fail(kind, "unexpected end of file");
  return value;
}

}  // namespace past::le
