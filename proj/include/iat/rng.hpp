#pragma once

#include <cstdint>
#include <vector>

namespace iat {

/// Deterministic random source (xoshiro256++ seeded through splitmix64).
/// Every distribution is built from explicit 53-bit uniforms, so a given
/// seed reproduces the same sequence on any platform. Handles are cheap to
/// copy; do not share one handle across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream derived from (seed, stream); used to give each
  /// training run / attack / dataset its own reproducible source.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (two uniforms per draw, no cache).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape);

  /// Uniform index in [0, n). n must be > 0.
  std::size_t index(std::size_t n);

  /// Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t s_[4];
};

}  // namespace iat
