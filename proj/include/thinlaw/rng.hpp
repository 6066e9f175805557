#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace thinlaw {

// splitmix64 finalizer; scatters derived stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a, for deriving streams from metric/check labels.
constexpr std::uint64_t hash_label(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seeded random stream with deterministic sub-stream derivation.
///
/// Every sampler in this library takes an explicit RngStream; there is no
/// global RNG state. Sub-streams are derived from the parent's key and a
/// caller-chosen label/index, never from the parent's draw position, so
/// per-cell work can run in any order (or on any worker) and still
/// reproduce the same numbers.
///
/// The engine is std::mt19937_64 (bit-exact across platforms); uniforms and
/// all integer variates are generated here rather than through
/// std::*_distribution, whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(seed), engine_(mix64(mix64(seed))) {}

  /// Child stream keyed by (this stream's key, a, b).
  [[nodiscard]] RngStream derive(std::uint64_t a, std::uint64_t b = 0) const {
    std::uint64_t k = mix64(key_);
    k = mix64(k ^ mix64(a));
    k = mix64(k ^ mix64(b));
    return RngStream(k);
  }

  [[nodiscard]] RngStream derive(std::string_view label, std::uint64_t a = 0) const {
    return derive(hash_label(label), a);
  }

  std::uint64_t key() const noexcept { return key_; }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Exact Poisson draw via the Knuth product method, chunked so that
  /// exp(-lambda) stays far from underflow. O(lambda) per draw.
  std::uint64_t poisson(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("poisson: lambda must be >= 0");
    std::uint64_t total = 0;
    while (lambda > 30.0) {
      total += poisson_small(30.0);
      lambda -= 30.0;
    }
    return total + poisson_small(lambda);
  }

 private:
  std::uint64_t poisson_small(double lambda) {
    if (lambda == 0.0) return 0;
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double prod = uniform01();
    while (prod > limit) {
      ++k;
      prod *= uniform01();
    }
    return k;
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace thinlaw
