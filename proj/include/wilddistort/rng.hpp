#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace wilddistort {

/// SplitMix64 output function (Steele, Lea, Flood 2014). Used both to seed the
/// generator state and as the mixing function for derived streams.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// 64-bit FNV-1a over the bytes of `s`; turns string keys (image ids, stream
/// names) into derive() keys.
std::uint64_t fnv1a64(std::string_view s);

/// Deterministic random stream: xoshiro256** 1.0 (Blackman & Vigna) seeded
/// from a 64-bit value through SplitMix64, exactly as in the reference
/// `splitmix64.c` / `xoshiro256starstar.c`.
///
/// Every derived quantity (uniform reals, bounded integers, normals, Poisson
/// counts) is computed with integer arithmetic or IEEE-754 basic operations
/// plus `std::log`/`std::sqrt`, and the draw count per call is fixed by the
/// algorithm, so a given seed yields the same sequence on every platform and
/// regardless of threading.
///
/// Instances are single-owner. Parallel work items call derive() to obtain
/// their own stream instead of sharing one.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream. The child seed is
  /// `splitmix64_mix(seed ^ splitmix64_mix(key + 0x9E3779B97F4A7C15))`.
  SeededRng derive(std::uint64_t child_key) const;
  SeededRng derive(std::string_view child_key) const { return derive(fnv1a64(child_key)); }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits: (next >> 11) * 2^-53.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection of the biased tail; n >= 1.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

  /// Standard normal via the Marsaglia polar method (one value per accepted
  /// pair; the second value is discarded so each call is self-contained).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Poisson count. Knuth's product method for mean < 30, otherwise the
  /// rounded normal approximation clamped at zero.
  std::uint64_t poisson(double mean);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace wilddistort
