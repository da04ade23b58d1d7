#pragma once

#include <array>
#include <cstdint>

namespace bloatsim::sim {

// SplitMix64 (Steele, Lea, Flood 2014). Used on its own only to expand a
// 64-bit seed into generator state.
//
//   state += 0x9E3779B97F4A7C15
//   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64
{
public:
  explicit SplitMix64(uint64_t seed) : m_state(seed) {}
  uint64_t Next();

private:
  uint64_t m_state;
};

// xoshiro256** 1.0 (Blackman, Vigna). The four state words are the first
// four SplitMix64 outputs for the seed.
//
//   result = rotl(s[1] * 5, 7) * 9
//   t = s[1] << 17
//   s[2] ^= s[0]; s[3] ^= s[1]; s[1] ^= s[2]; s[0] ^= s[3]
//   s[2] ^= t; s[3] = rotl(s[3], 45)
//
// Reals in [0, 1) take the top 53 bits: (x >> 11) * 2^-53.
class Prng
{
public:
  explicit Prng(uint64_t seed);

  uint64_t Seed() const { return m_seed; }
  uint64_t NextU64();
  double NextUnit();

  // Uniform real in [lo, hi); lo == hi returns lo. Throws std::invalid_argument
  // when lo > hi.
  double Uniform(double lo, double hi);

private:
  uint64_t m_seed;
  std::array<uint64_t, 4> m_s;
};

} // namespace bloatsim::sim
