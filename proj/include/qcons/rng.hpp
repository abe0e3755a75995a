#pragma once

#include <cstdint>
#include <random>

namespace qcons {

/// Seedable generator with platform-independent output.
///
/// The engine is std::mt19937_64, whose raw sequence is fixed by the C++
/// standard. The standard distributions are not (libstdc++ and libc++ differ),
/// so every conversion to a double or a bounded integer is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [0, bound); bound must be positive. Unbiased (rejection).
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform on [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent seed for a numbered sub-stream (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace qcons
