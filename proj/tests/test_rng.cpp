#include "fog/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace {

TEST(DeriveSeed, DeterministicAndSensitive) {
    auto base = fog::derive_seed(42, "train", 0, 0);
    EXPECT_EQ(base, fog::derive_seed(42, "train", 0, 0));
    EXPECT_NE(base, fog::derive_seed(43, "train", 0, 0));
    EXPECT_NE(base, fog::derive_seed(42, "init", 0, 0));
    EXPECT_NE(base, fog::derive_seed(42, "train", 1, 0));
    EXPECT_NE(base, fog::derive_seed(42, "train", 0, 1));
}

TEST(DeriveSeed, ArgumentsAreNotInterchangeable) {
    EXPECT_NE(fog::derive_seed(7, "x", 1, 2), fog::derive_seed(7, "x", 2, 1));
}

// The core generator is the standard 64-bit Mersenne Twister, so the raw
// stream can be checked against the standard library directly.
TEST(Rng, RawStreamMatchesStandardEngine) {
    fog::Rng rng(12345);
    std::mt19937_64 reference(12345);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(rng.next(), reference());
    }
}

TEST(Rng, Uniform01RangeAndDeterminism) {
    fog::Rng a(7), b(7);
    for (int i = 0; i < 10000; ++i) {
        double x = a.uniform01();
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
        EXPECT_EQ(x, b.uniform01());
    }
}

// uniform01 maps the top 53 bits of the raw stream onto [0,1).
TEST(Rng, Uniform01IsTop53Bits) {
    fog::Rng rng(99);
    std::mt19937_64 reference(99);
    for (int i = 0; i < 100; ++i) {
        double expected = static_cast<double>(reference() >> 11) * 0x1.0p-53;
        EXPECT_EQ(rng.uniform01(), expected);
    }
}

TEST(Rng, NormalMoments) {
    fog::Rng rng(2024);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Rng, BelowBoundsAndCoverage) {
    fog::Rng rng(5);
    std::set<std::size_t> seen;
    for (int i = 0; i < 1000; ++i) {
        std::size_t v = rng.below(10);
        EXPECT_LT(v, 10u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 10u);
    EXPECT_EQ(rng.below(1), 0u);
}

TEST(Rng, ShuffleIsPermutationAndDeterministic) {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    auto a = v, b = v;
    fog::Rng ra(11), rb(11);
    ra.shuffle(a);
    rb.shuffle(b);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, v);
    std::sort(a.begin(), a.end());
    EXPECT_EQ(a, v);
}

TEST(Rng, StreamsWithDifferentSeedsDiffer) {
    fog::Rng a(1), b(2);
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
        if (a.next() != b.next()) ++differing;
    }
    EXPECT_GT(differing, 90);
}

}  // namespace
