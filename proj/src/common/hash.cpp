// SPDX-License-Identifier: Apache-2.0
#include "deepforge/common/hash.hpp"

#include <array>

namespace deepforge {

std::string to_hex16(std::uint64_t value) {
  static constexpr std::array<char, 16> kDigits = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                   '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

HashBuilder& HashBuilder::add(std::string_view part) {
  state_ = fnv1a64(std::to_string(part.size()), state_);
  state_ = fnv1a64(":", state_);
  state_ = fnv1a64(part, state_);
  return *this;
}

HashBuilder& HashBuilder::add(std::uint64_t value) { return add(std::to_string(value)); }

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
  return mix64(HashBuilder().add(parent).add(label).value());
}

}  // namespace deepforge
