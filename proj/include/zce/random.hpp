#pragma once

#include <cstdint>
#include <random>

namespace zce {

/// Seeded source of uniform variates. Every sampler in the library draws
/// from one of these, so a seed fixes the whole sample path.
///
/// Streams are cheap to copy but must not be shared between threads; use
/// `RandomStream::derive` to give each worker or replication its own.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Independent stream for (seed, index), e.g. one per replication.
  static RandomStream derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard exponential.
  double exponential();

  /// Standard normal (Marsaglia polar method, one cached spare).
  double normal();

  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finaliser; used for seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace zce
