#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "paradigms/random.hpp"

using namespace paradigms;

TEST(Philox, KnownAnswerZero) {
  const Philox4x32 gen(Philox4x32::Key{0, 0});
  const auto out = gen({0, 0, 0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerOnes) {
  const Philox4x32 gen(Philox4x32::Key{0xffffffff, 0xffffffff});
  const auto out = gen({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  const Philox4x32 gen(Philox4x32::Key{0xa4093822, 0x299f31d0});
  const auto out = gen({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, SeedSplitsIntoKeyHalves) {
  const Philox4x32 gen(0x299f31d0a4093822ULL);
  EXPECT_EQ(gen.key(), (Philox4x32::Key{0xa4093822, 0x299f31d0}));
}

TEST(Random, UniformInOpenInterval) {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = uniform_at(7, Stream::kData, 3, i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Random, NormalsIndependentOfRequestLength) {
  std::vector<double> a(7), b(3);
  fill_standard_normal(42, Stream::kStepNoise, 11, a);
  fill_standard_normal(42, Stream::kStepNoise, 11, b);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Random, StreamsAndStepsDiffer) {
  std::vector<double> a(4), b(4), c(4);
  fill_standard_normal(1, Stream::kStepNoise, 0, a);
  fill_standard_normal(1, Stream::kPrior, 0, b);
  fill_standard_normal(1, Stream::kStepNoise, 1, c);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
}

TEST(Random, NormalMoments) {
  std::vector<double> z(200000);
  fill_standard_normal(3, Stream::kStepNoise, 0, z);
  double m = 0.0, v = 0.0;
  for (double x : z) m += x;
  m /= static_cast<double>(z.size());
  for (double x : z) v += (x - m) * (x - m);
  v /= static_cast<double>(z.size());
  EXPECT_NEAR(m, 0.0, 0.01);
  EXPECT_NEAR(v, 1.0, 0.01);
}
