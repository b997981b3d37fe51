#pragma once

// Portable counter-free PRNG used everywhere randomness is needed.
// std::shuffle / std::uniform_int_distribution are implementation-defined,
// so all draws below are hand-rolled on top of SplitMix64 to make seeded
// results reproducible across compilers and standard libraries.

#include <cstdint>
#include <vector>

namespace transmod {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Collapses (seed, stream ids) into a fresh seed; used to derive
// independent per-tree / per-node / per-purpose streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = seed;
  std::uint64_t z = splitmix64(s);
  s = z ^ (a * 0x9E3779B97F4A7C15ULL + 0x7F4A7C15ULL);
  z = splitmix64(s);
  s = z ^ (b * 0xBF58476D1CE4E5B9ULL + 0x1CE4E5B9ULL);
  z = splitmix64(s);
  s = z ^ (c * 0x94D049BB133111EBULL + 0x133111EBULL);
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); never returns an exact endpoint.
  double next_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via the inverse CDF (defined in link.cpp).
  double normal();

  // Unbiased integer in [0, n) (Lemire's method).
  std::uint64_t bounded(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto l = static_cast<std::uint64_t>(m);
    if (l < n) {
      std::uint64_t t = (0 - n) % n;
      while (l < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        l = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
};

}  // namespace transmod
