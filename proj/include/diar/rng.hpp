#ifndef DIAR_RNG_HPP
#define DIAR_RNG_HPP

#include <cmath>
#include <cstdint>

// Portable deterministic RNG. std::normal_distribution is not reproducible
// across standard libraries, so corpora are generated with a fixed, named
// generator: splitmix64 seeds four xoshiro256** words, normals come from
// Box-Muller. Streams are split by hashing (seed, stream-id) through
// splitmix64 so parallel generation stays order-independent.

namespace diar::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
    has_cached_normal_ = false;
    cached_normal_ = 0.0;
  }

  /// Derive an independent stream: generator for (seed, stream-id).
  static Xoshiro256ss stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t sm = seed;
    std::uint64_t mixed = splitmix64(sm) ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    return Xoshiro256ss(mixed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return next_u64() % n;  // bias negligible for n << 2^64
  }

  /// Standard normal via Box-Muller (pairwise, cached).
  double next_normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
  }

  /// Log-normal with the given median and log-domain sigma.
  double next_lognormal(double median, double log_sigma) {
    return median * std::exp(log_sigma * next_normal());
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  bool has_cached_normal_;
  double cached_normal_;
};

}  // namespace diar::rng

#endif  // DIAR_RNG_HPP
