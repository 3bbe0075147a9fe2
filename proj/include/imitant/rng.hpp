#pragma once

#include <cmath>
#include <cstdint>

namespace imitant {

// Deterministic pseudorandom generator: xoshiro256** seeded through
// splitmix64 (Blackman & Vigna). This is the only entropy source in the
// toolkit; every stochastic choice (init, shuffles, dropout, synthetic
// data) draws from an instance seeded from the run seed, so runs with the
// same seed replay bit-identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the xoshiro state
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      s = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
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

  // uniform in [0, 1): 53 mantissa bits
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // multiply-shift rejection-free mapping is fine at toolkit scale
    return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
  }

  // standard normal via Box-Muller (one value per call, cached pair dropped
  // to keep the draw count predictable)
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // deterministic child stream; stream index perturbs the seed
  Rng fork(std::uint64_t stream) const {
    Rng child(0);
    child.state_[0] = state_[0] ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    child.state_[1] = state_[1] + 0xd1b54a32d192ed03ULL * (stream + 1);
    child.state_[2] = state_[2] ^ rotl(stream + 0x2545f4914f6cdd1dULL, 23);
    child.state_[3] = state_[3] + (stream << 1 | 1);
    // scramble so nearby streams decorrelate
    for (int i = 0; i < 8; ++i) child.next_u64();
    return child;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4] = {};
};

}  // namespace imitant
