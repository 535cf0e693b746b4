#pragma once

#include <cstdint>

namespace gsfica {

// splitmix64: used for seeding and for deriving independent per-trial streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream seed for trial t of an experiment with the given base seed.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t t) {
  std::uint64_t s = base_seed ^ (0x9e3779b97f4a7c15ULL * (t + 1));
  return splitmix64(s);
}

// xoshiro256++ (Blackman & Vigna). Fixed bit-level behavior on every platform,
// which std::<distribution> does not guarantee.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); safe to feed into quantile functions.
  double uniform_open() {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    // 0 occurs with probability 2^-53; nudge into the open interval.
    return u > 0.0 ? u : 0x1.0p-54;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace gsfica
