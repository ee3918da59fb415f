#pragma once

#include <cstdint>

namespace patchpnp {

/// Counter-based generator: every draw is a pure function of (key, counter),
/// so a noise field can be filled in any order or in parallel and still
/// reproduce bit-for-bit. Bits come from the SplitMix64 finalizer applied to
/// a Weyl sequence; normals use the Box-Muller cosine branch on two uniforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform in (0, 1].
  double uniform(std::uint64_t counter) const;
  /// Uniform integer in [0, n) by 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t counter, std::uint64_t n) const;
  /// Standard normal.
  double gaussian(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent seed for a named sub-stream (e.g. per diffusion step).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace patchpnp
