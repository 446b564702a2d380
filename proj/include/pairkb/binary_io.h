// Copyright 2026 The PairKB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Little-endian fixed-width encoding helpers for the on-disk formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>

#include "pairkb/status.h"

namespace pairkb::io {

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xFF);
    u = static_cast<U>(u >> 8);
  }
  out.write(bytes, sizeof(T));
}

inline void write_f32(std::ostream& out, float value) {
  write_le(out, std::bit_cast<std::uint32_t>(value));
}

inline void write_f32s(std::ostream& out, std::span<const float> values) {
  for (float v : values) write_f32(out, v);
}

template <typename T>
T decode_le(const unsigned char* bytes) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<U>((u << 8) | bytes[i]);
  return static_cast<T>(u);
}

// Reads exactly sizeof(T) bytes or throws kTruncatedFile.
template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    fail(ErrorCode::kTruncatedFile, "unexpected end of file");
  }
  return decode_le<T>(bytes);
}

inline float read_f32(std::istream& in) { return std::bit_cast<float>(read_le<std::uint32_t>(in)); }

inline void read_f32s(std::istream& in, std::span<float> out) {
  std::string buf(out.size() * 4, '\0');
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    fail(ErrorCode::kTruncatedFile, "unexpected end of file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<float>(decode_le<std::uint32_t>(p + 4 * i));
  }
}

}  // namespace pairkb::io
