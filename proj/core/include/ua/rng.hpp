#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ua {

// Deterministic random stream. All sampling helpers are implemented here
// (not via std::*_distribution) so that a (seed, stream id) pair produces
// the same byte-identical draw sequence on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in {0, .., n-1}; rejection sampling, unbiased.
  std::uint32_t uniform_int(std::uint32_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  // Index drawn from the given (approximately normalized) weights.
  // Consumes exactly one uniform01() regardless of the outcome.
  int categorical(std::span<const double> weights);

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Stream-id hashing (splitmix64 steps) so that derived streams for
// different (user, replication, purpose) tuples are decorrelated.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

inline RngStream derive_stream(std::uint64_t base, std::uint64_t tag,
                               std::uint64_t index = 0) {
  return RngStream(mix_seed(base, tag, index));
}

// Stream tags used across the toolkit. Per-user streams are derived from
// (seed, kStreamUser, user index) so instrumentation cannot perturb draws.
inline constexpr std::uint64_t kStreamUser = 0x75736572;
inline constexpr std::uint64_t kStreamEnv = 0x656e76;
inline constexpr std::uint64_t kStreamReplication = 0x726570;
inline constexpr std::uint64_t kStreamInit = 0x696e6974;

}  // namespace ua
