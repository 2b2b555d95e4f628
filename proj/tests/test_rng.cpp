#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dwl/rng.hpp"

using namespace dwl;

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, ZeroCounterZeroKey) {
  const auto r = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
  EXPECT_EQ(r[0], 0x6627e8d5u);
  EXPECT_EQ(r[1], 0xe169c58du);
  EXPECT_EQ(r[2], 0xbc57ac4cu);
  EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, AllOnes) {
  const auto r = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r[0], 0x408f276du);
  EXPECT_EQ(r[1], 0x41c83b0eu);
  EXPECT_EQ(r[2], 0xa20bc7c6u);
  EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Philox, PiDigits) {
  const auto r = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r[0], 0xd16cfe09u);
  EXPECT_EQ(r[1], 0x94fdccebu);
  EXPECT_EQ(r[2], 0x5001e420u);
  EXPECT_EQ(r[3], 0x24126ea1u);
}

TEST(Philox, IsConstexpr) {
  constexpr auto r = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
  static_assert(r[0] == 0x6627e8d5u);
  SUCCEED();
}

TEST(CounterRng, SeedSplitsIntoKeyWords) {
  const CounterRng rng(0x299f31d0a4093822ull);
  EXPECT_EQ(rng.key()[0], 0xa4093822u);
  EXPECT_EQ(rng.key()[1], 0x299f31d0u);
  const auto r = rng.raw(0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u);
  EXPECT_EQ(r[0], 0xd16cfe09u);
}

TEST(CounterRng, UnitIntervalBounds) {
  EXPECT_EQ(to_unit(0u, 0u), 0.0);
  EXPECT_LT(to_unit(0xffffffffu, 0xffffffffu), 1.0);
  EXPECT_GT(to_unit(0xffffffffu, 0xffffffffu), 1.0 - 1e-15);
}

TEST(CounterRng, NormalMoments) {
  const CounterRng rng(17);
  const int N = 200000;
  double s1 = 0, s2 = 0, s4 = 0, cross = 0;
  for (int k = 0; k < N; ++k) {
    const auto [z0, z1] = rng.normals(static_cast<std::uint32_t>(k), 0, 0, 0);
    for (double z : {z0, z1}) {
      s1 += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
    cross += z0 * z1;
  }
  const double M = 2.0 * N;
  EXPECT_NEAR(s1 / M, 0.0, 0.01);
  EXPECT_NEAR(s2 / M, 1.0, 0.01);
  EXPECT_NEAR(s4 / M, 3.0, 0.05);
  EXPECT_NEAR(cross / N, 0.0, 0.01);
}

TEST(CounterRng, DistinctCoordinatesGiveDistinctBlocks) {
  const CounterRng rng(5);
  std::set<std::uint32_t> seen;
  for (std::uint32_t i = 0; i < 50; ++i)
    for (std::uint32_t j = 0; j < 50; ++j) seen.insert(rng.raw(i, j, 0, 0)[0]);
  EXPECT_GT(seen.size(), 2490u);
}

TEST(CounterStream, Deterministic) {
  CounterStream a(99, 3), b(99, 3), c(99, 4);
  std::vector<std::uint32_t> va, vb, vc;
  for (int k = 0; k < 20; ++k) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
}

TEST(CounterStream, BelowIsUniform) {
  CounterStream s(1, 0);
  std::vector<int> counts(7, 0);
  const int N = 70000;
  for (int k = 0; k < N; ++k) ++counts[s.below(7)];
  for (int c : counts) EXPECT_NEAR(c, N / 7.0, 5.0 * std::sqrt(N / 7.0));
}

TEST(CounterStream, UniformRange) {
  CounterStream s(2, 0);
  for (int k = 0; k < 1000; ++k) {
    const double u = s.uniform(-3.0, 5.0);
    EXPECT_GE(u, -3.0);
    EXPECT_LT(u, 5.0);
  }
}

TEST(Mix64, SpreadsNearbySeeds) {
  EXPECT_NE(mix64(0), mix64(1));
  EXPECT_NE(mix64(1) >> 32, mix64(2) >> 32);
}
