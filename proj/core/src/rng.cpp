#include "ua/rng.hpp"

#include "ua/errors.hpp"

namespace ua {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = a;
  std::uint64_t h = splitmix64(x);
  x ^= h ^ b;
  h = splitmix64(x);
  x ^= h ^ c;
  return splitmix64(x);
}

std::uint32_t RngStream::uniform_int(std::uint32_t n) {
  if (n == 0) throw InternalError("uniform_int: n must be positive");
  if (n == 1) return 0;
  // Rejection below the largest multiple of n that fits in 64 bits.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return static_cast<std::uint32_t>(x % n);
}

int RngStream::categorical(std::span<const double> weights) {
  const double u = uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u landed in the rounding slack past the last cumulative weight.
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace ua
