#pragma once

#include <cstdint>
#include <vector>

namespace sepolml {

/// splitmix64 mixing step; used for seed expansion and sub-seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent sub-seed from a base seed and up to two stream ids.
/// Derivation depends only on the arguments, so consumers may be seeded in
/// any order (walk generation per (start node, walk index), one tree per
/// index, and so on).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ (a + 0x516cc8a1c9d7f291ULL));
  h = splitmix64(h ^ (b + 0x7f4a7c159e3779b9ULL));
  return h;
}

/// xoshiro256** generator with portable helpers. The standard library
/// distributions are implementation-defined, so everything that must be
/// reproducible bit-for-bit goes through this class instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x = splitmix64(x);
      word = x;
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, n). n must be nonzero.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform float in [0, 1) with 24 random bits.
  float unit_float() { return static_cast<float>(next() >> 40) * 0x1.0p-24f; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace sepolml
