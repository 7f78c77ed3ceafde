#pragma once

#include <cstdint>

namespace upm {

// Splittable deterministic generator built on the SplitMix64 finalizer.
// Same seed gives a bit-identical sample sequence on every platform, and
// split(label) depends only on (seed, label) — not on how many values the
// parent has produced — so per-trial streams are reproducible under any
// parallel schedule.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Marsaglia's polar method (inverse-free).
  double gaussian();

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);

  Rng split(std::uint64_t stream) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

}  // namespace upm
