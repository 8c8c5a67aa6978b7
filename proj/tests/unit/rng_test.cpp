#include <gtest/gtest.h>

#include <array>
#include <vector>

#include "caps/rng.hpp"

using caps::Rng;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng(42).next(), c.next());
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, IndexIsUniform) {
  Rng r(2);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[r.index(7)];
  for (int c : counts) EXPECT_NEAR(c / 70000.0, 1.0 / 7.0, 0.01);
  EXPECT_THROW(r.index(0), caps::UsageError);
}

TEST(Rng, CertainBernoulliConsumesNothing) {
  Rng a(3), b(3);
  EXPECT_TRUE(a.bernoulli(1.0));
  EXPECT_FALSE(a.bernoulli(0.0));
  EXPECT_EQ(a, b);
  a.bernoulli(0.5);
  EXPECT_FALSE(a == b);
}

TEST(Rng, CategoricalFrequencies) {
  Rng r(4);
  const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
  std::array<int, 4> counts{};
  for (int i = 0; i < 100000; ++i) ++counts[r.categorical(p)];
  EXPECT_EQ(counts[1], 0);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(counts[k] / 100000.0, p[k], 0.01);
}

TEST(Rng, SerializeRoundTrip) {
  Rng a(5);
  a.next();
  Rng b = Rng::deserialize(a.serialize());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_THROW(Rng::deserialize("garbage"), caps::LoadError);
}
