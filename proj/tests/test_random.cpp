#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "wtperf/random.hpp"

using wtperf::Rng;

TEST(Random, SameSeedSameStream)
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    EXPECT_NE(Rng(42).next_u64(), Rng(43).next_u64());
}

TEST(Random, UniformInUnitInterval)
{
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Random, WeibullMeanMatchesAnalytic)
{
    Rng r(7);
    const int n = 100000;
    double s = 0;
    for (int i = 0; i < n; ++i) s += r.weibull(2.0, 8.0);
    const double expected = 8.0 * std::tgamma(1.5); // 7.0898...
    EXPECT_NEAR(expected, 7.0898, 1e-4);
    EXPECT_LT(std::fabs(s / n - expected) / expected, 0.01);
}

TEST(Random, NormalMoments)
{
    Rng r(9);
    const int n = 100000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal(3.0, 2.0);
        s += x;
        ss += x * x;
    }
    const double m = s / n;
    EXPECT_NEAR(m, 3.0, 0.03);
    EXPECT_NEAR(std::sqrt(ss / n - m * m), 2.0, 0.03);
}

TEST(Random, ShuffleIsPermutationAndReproducible)
{
    std::vector<int> a(50), b;
    std::iota(a.begin(), a.end(), 0);
    b = a;
    Rng r1(5), r2(5);
    r1.shuffle(a);
    r2.shuffle(b);
    EXPECT_EQ(a, b);
    auto s = a;
    std::sort(s.begin(), s.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(s[static_cast<std::size_t>(i)], i);
}

TEST(Random, DerivedSeedsDiffer)
{
    EXPECT_NE(wtperf::derive_seed(17, 0), wtperf::derive_seed(17, 1));
    EXPECT_EQ(wtperf::derive_seed(17, 3), wtperf::derive_seed(17, 3));
}

TEST(Random, BelowStaysInRange)
{
    Rng r(3);
    for (int i = 0; i < 1000; ++i) ASSERT_LT(r.below(7), 7u);
}
