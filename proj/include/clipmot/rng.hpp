#pragma once

#include <cstdint>
#include <vector>

namespace clipmot {

/// Counter-based generator built on the SplitMix64 mixing function.
///
/// Output n of a stream is `mix(key + (n + 1) * 0x9E3779B97F4A7C15)` where
/// `mix` is the SplitMix64 finalizer (shifts 30/27/31, multipliers
/// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). The key is derived from the
/// (seed, stream) pair, so independent streams can be opened without
/// sharing state. Every derived draw (uniform, normal, integer range) is
/// implemented here rather than through <random> distributions, whose
/// outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();
  bool bernoulli(double p);

  std::uint64_t counter() const { return counter_; }

  /// Seed for a child stream; deterministic in (this key, tag).
  std::uint64_t derive(std::uint64_t tag) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace clipmot
