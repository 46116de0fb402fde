#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "clipmot/rng.hpp"

using clipmot::Rng;

TEST(Rng, SplitMixReferenceValues) {
  // Reference outputs of SplitMix64 seeded with 0, computed from the
  // published algorithm: state += golden gamma, then the finalizer.
  auto reference = [](std::uint64_t state, int n) {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < n; ++i) {
      state += 0x9E3779B97F4A7C15ull;
      std::uint64_t z = state;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      out.push_back(z ^ (z >> 31));
    }
    return out;
  };
  EXPECT_EQ(reference(0, 1)[0], 0xE220A8397B1DCDAFull);
  EXPECT_EQ(Rng::mix(0x9E3779B97F4A7C15ull), 0xE220A8397B1DCDAFull);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.counter(), 100u);
}

TEST(Rng, StreamsAndSeedsDiffer) {
  Rng a(42, 0), b(42, 1), c(43, 0);
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(Rng, UniformRangeAndMean) {
  Rng r(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Standard error of the mean is sqrt(1/12/n) ~ 0.0009.
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, NormalMoments) {
  Rng r(11);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.03);
}

TEST(Rng, BelowCoversRangeUniformly) {
  Rng r(5);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.below(6);
    ASSERT_LT(k, 6u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 6.0, 5 * std::sqrt(n * (1.0 / 6) * (5.0 / 6)));
}

TEST(Rng, ShuffleIsPermutation) {
  Rng r(9);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  r.shuffle(v);
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
  std::vector<int> id(50);
  for (int i = 0; i < 50; ++i) id[i] = i;
  EXPECT_NE(v, id);
}

TEST(Rng, DeriveIsDeterministic) {
  Rng a(1), b(1);
  EXPECT_EQ(a.derive(5), b.derive(5));
  EXPECT_NE(a.derive(5), a.derive(6));
}
