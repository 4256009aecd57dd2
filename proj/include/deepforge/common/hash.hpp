// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace deepforge {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// FNV-1a 64-bit over raw bytes. Stable across platforms and runs.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

/// Lower-case, zero-padded 16 digit hex.
std::string to_hex16(std::uint64_t value);

/// Mixes a 64-bit value (splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Builds a stable hash from heterogeneous parts. Parts are length-prefixed so
/// ("ab","c") and ("a","bc") differ.
class HashBuilder {
 public:
  HashBuilder& add(std::string_view part);
  HashBuilder& add(std::uint64_t value);
  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const { return to_hex16(state_); }

 private:
  std::uint64_t state_ = kFnvOffset;
};

/// Convenience: derive a child seed from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

}  // namespace deepforge
