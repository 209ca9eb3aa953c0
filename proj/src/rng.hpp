#pragma once

#include <cmath>
#include <cstdint>

namespace capekit {

// Deterministic random source used everywhere randomness is needed.
// xoshiro256++ seeded through splitmix64, with Box-Muller normals.
// The generator is self-contained so that a given master seed produces the
// same streams on every platform and standard library.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
    have_spare_ = false;
    spare_ = 0.0;
  }

  /// Independent stream for a worker unit (bootstrap replica, Monte Carlo
  /// path). Streams derived from the same master seed and distinct ids are
  /// reproducible regardless of evaluation order.
  static Rng stream(uint64_t master_seed, uint64_t stream_id, uint64_t substream = 0) {
    uint64_t sm = master_seed;
    uint64_t a = splitmix64(sm);
    sm ^= (stream_id + 1) * 0xD1B54A32D192ED03ULL;
    uint64_t b = splitmix64(sm);
    sm ^= (substream + 1) * 0x8CB92BA72F3D8DD7ULL;
    uint64_t c = splitmix64(sm);
    return Rng(a ^ (b + (c << 1)));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) {
    // Multiply-shift bounded draw; the modulo bias is below 2^-64 * n and
    // irrelevant at the sample sizes used here.
    unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<uint64_t>(wide >> 64);
  }

  /// Standard normal via Box-Muller, caching the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
  bool have_spare_;
  double spare_;
};

}  // namespace capekit
