#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace situate {

// Stream derivation for reproducible, order-independent generation.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

// Small counter-free PRNG (xoshiro256**). Distribution helpers are defined
// here rather than via <random> so output is identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  // [0, 1)
  double uniform();
  // [lo, hi]
  double uniform(double lo, double hi);
  // Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  std::size_t index(std::size_t n);
  bool bernoulli(double p);
  // Inverse-CDF draw from a discrete distribution; weights need not be normalized.
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::uint64_t s_[4];
};

// FNV-1a, used for config hashes and image fingerprints.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace situate
