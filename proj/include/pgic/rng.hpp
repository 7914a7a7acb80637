// Counter-based pseudorandom streams (Philox4x32-10 construction).
//
// Every stream is addressed by (seed, domain, instance): the seed is the 64-bit
// key, domain/instance select a named substream by occupying fixed words of the
// 128-bit counter. Streams never share state, so draws in one substream cannot
// perturb another, and a run is reproducible from its seed alone.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pgic {

// Named substream domains. Keeping these centralized guarantees two components
// never collide on the same counter block.
enum class StreamDomain : uint32_t {
  channel_draws = 1,   // fading realizations consumed by learner iterations
  noise_draws = 2,     // feedback perturbations (theta / bias models)
  oracle_pool = 3,     // frozen sample pool for the equilibrium solver
  feasible_points = 4, // random points in the feasible set (tests, Lipschitz)
  scratch = 5,         // miscellaneous helpers
};

class RngStream {
 public:
  RngStream(uint64_t seed, StreamDomain domain, uint32_t instance = 0)
      : key_lo_(static_cast<uint32_t>(seed)),
        key_hi_(static_cast<uint32_t>(seed >> 32)),
        instance_(instance),
        domain_(static_cast<uint32_t>(domain)) {}

  uint32_t next_u32() {
    if (pos_ == 4) {
      block(block_index_++, buf_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  // Uniform double in [0, 1) with 53 random bits. Always consumes two words.
  double next_double() {
    const uint64_t hi = next_u32() >> 5;  // 27 bits
    const uint64_t lo = next_u32() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Standard normal via Box-Muller (cosine branch only, so the draw count per
  // call is fixed at two doubles regardless of the values produced).
  double normal() {
    const double u1 = 1.0 - next_double();  // (0, 1], keeps the log finite
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  static constexpr double two_pi = 6.283185307179586476925286766559;

  void block(uint64_t index, std::array<uint32_t, 4>& out) const {
    uint32_t c0 = static_cast<uint32_t>(index);
    uint32_t c1 = static_cast<uint32_t>(index >> 32);
    uint32_t c2 = instance_;
    uint32_t c3 = domain_;
    uint32_t k0 = key_lo_;
    uint32_t k1 = key_hi_;
    for (int round = 0; round < 10; ++round) {
      const uint64_t m0 = static_cast<uint64_t>(0xD2511F53u) * c0;
      const uint64_t m1 = static_cast<uint64_t>(0xCD9E8D57u) * c2;
      const uint32_t n0 = static_cast<uint32_t>(m1 >> 32) ^ c1 ^ k0;
      const uint32_t n1 = static_cast<uint32_t>(m1);
      const uint32_t n2 = static_cast<uint32_t>(m0 >> 32) ^ c3 ^ k1;
      const uint32_t n3 = static_cast<uint32_t>(m0);
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;  // Weyl constants from the Philox reference design
      k1 += 0xBB67AE85u;
    }
    out = {c0, c1, c2, c3};
  }

  uint32_t key_lo_;
  uint32_t key_hi_;
  uint32_t instance_;
  uint32_t domain_;
  uint64_t block_index_ = 0;
  std::array<uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace pgic
