#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace transmod {

inline constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t state = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state ^= p[i];
    state *= kFnvPrime;
  }
  return state;
}

std::string to_hex(std::uint64_t value);

}  // namespace transmod
