#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace devalign {

// Seeded generator whose output is fully specified across standard libraries:
// mt19937_64 has a normative sequence, and the distributions below are
// implemented here instead of using the implementation-defined std ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t index(std::uint64_t n);

  // Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Sub-seed for an independent stream identified by `key`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) noexcept;

}  // namespace devalign
