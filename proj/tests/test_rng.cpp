#include "hdmean/rng.hpp"

#include <gtest/gtest.h>

#include <concepts>
#include <random>
#include <set>

using namespace hdmean;

static_assert(std::uniform_random_bit_generator<RngStream>);

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(RngStream, FirstBlockOfZeroStreamIsTheZeroCounterBlock) {
  RngStream s(0, 0);
  EXPECT_EQ(s(), 0x6627e8d5u);
  EXPECT_EQ(s(), 0xe169c58du);
  EXPECT_EQ(s(), 0xbc57ac4cu);
  EXPECT_EQ(s(), 0x9b00dbd8u);
}

TEST(RngStream, DeterministicAndStreamSeparated) {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint32_t> firsts;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    if (i == 0) {
      firsts.insert(x);
      firsts.insert(c());
      firsts.insert(d());
    }
  }
  EXPECT_EQ(firsts.size(), 3u);
}

TEST(RngStream, ForkIsDeterministicAndDistinct) {
  const RngStream root(5, 3);
  RngStream f1 = root.fork(1), f1b = root.fork(1), f2 = root.fork(2);
  RngStream copy = root;
  EXPECT_EQ(f1.stream_id(), 3u);
  const auto x = f1();
  EXPECT_EQ(x, f1b());
  EXPECT_NE(x, f2());
  EXPECT_NE(x, copy());
}

TEST(RngStream, UniformBitsLookUniform) {
  RngStream s(mix64(99), 0);
  constexpr int kN = 200000;
  std::array<int, 16> bins{};
  for (int i = 0; i < kN; ++i) ++bins[s() >> 28];
  double chi2 = 0.0;
  const double e = kN / 16.0;
  for (int b : bins) chi2 += (b - e) * (b - e) / e;
  // 15 degrees of freedom; 0.999 quantile is about 37.7.
  EXPECT_LT(chi2, 37.7);
}

TEST(Mix64, KnownValuesAndSpread) {
  // SplitMix64 output for state increments from zero.
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_NE(mix64(1), mix64(2));
}
