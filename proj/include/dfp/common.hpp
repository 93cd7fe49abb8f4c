/*
 * Copyright 2026 The dfpregel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dfp {

/// Vertex identifier. Opaque 64-bit ordering key; the partitioning and join key everywhere.
using VertexId = std::uint64_t;

/// Opaque user bytes. Values, edge values, payloads and aggregates all travel as Blobs.
using Blob = std::string;

// Error hierarchy. Everything the engine throws derives from Error so the CLI can map
// it onto exit codes; the failure manager only retries InterruptionError and IoError.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operator was violated (unsorted input, empty bag, ...).
struct ContractViolation : Error {
  using Error::Error;
};

struct DuplicateKeyError : Error {
  using Error::Error;
};

/// Recoverable storage failure (I/O error, short read, corrupt page).
struct IoError : Error {
  using Error::Error;
};

/// Every buffer-cache frame is pinned; the configured cache is too small for the workload.
struct CacheExhaustedError : Error {
  using Error::Error;
};

/// A worker was interrupted (machine loss, injected failure). Recoverable from a checkpoint.
struct InterruptionError : Error {
  explicit InterruptionError(const std::string& what, int failed_worker = -1)
      : Error(what), worker(failed_worker) {}
  /// The lost worker, or -1 when unknown.
  int worker;
};

/// Raised from a channel endpoint after the other side or the job aborted.
struct ChannelClosed : Error {
  using Error::Error;
};

/// A user-defined function threw. Never retried.
struct ApplicationError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

namespace bytes {

inline void put_u64_be(char* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<char>(v & 0xff);
    v >>= 8;
  }
}

inline std::uint64_t get_u64_be(const char* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | static_cast<unsigned char>(in[i]);
  return v;
}

inline void put_u32_be(char* out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) {
    out[i] = static_cast<char>(v & 0xff);
    v >>= 8;
  }
}

inline std::uint32_t get_u32_be(const char* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(in[i]);
  return v;
}

inline void put_u16_be(char* out, std::uint16_t v) {
  out[0] = static_cast<char>(v >> 8);
  out[1] = static_cast<char>(v & 0xff);
}

inline std::uint16_t get_u16_be(const char* in) {
  return static_cast<std::uint16_t>((static_cast<unsigned char>(in[0]) << 8) |
                                    static_cast<unsigned char>(in[1]));
}

inline void append_u64_be(std::string& out, std::uint64_t v) {
  char buf[8];
  put_u64_be(buf, v);
  out.append(buf, 8);
}

inline void append_u32_be(std::string& out, std::uint32_t v) {
  char buf[4];
  put_u32_be(buf, v);
  out.append(buf, 4);
}

}  // namespace bytes

/// Bijective 64-bit finalizer (splitmix64). Used for hash partitioning and checksums.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a byte range, for cheap content fingerprints in stats and tests.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dfp
