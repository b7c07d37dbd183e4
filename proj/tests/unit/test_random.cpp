#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "repdl/random.hpp"

using repdl::CounterRng;
using repdl::philox4x32_10;

// Published Philox4x32-10 known-answer vectors.
TEST(Philox, KnownAnswers) {
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
              (repdl::PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (repdl::PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (repdl::PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, SequentialMatchesRandomAccess) {
    CounterRng seq(42, 7);
    const CounterRng ra(42, 7);
    for (std::uint64_t i = 0; i < 101; ++i) EXPECT_EQ(seq(), ra.at(i)) << i;
}

TEST(CounterRng, StreamsAndSeedsDiffer) {
    EXPECT_NE(CounterRng(1, 0).at(0), CounterRng(1, 1).at(0));
    EXPECT_NE(CounterRng(1, 0).at(0), CounterRng(2, 0).at(0));
    EXPECT_EQ(CounterRng(9, 3).at(5), CounterRng(9, 3).at(5));
}

TEST(CounterRng, UniformIndexCoversRange) {
    CounterRng rng(3, 0);
    std::vector<int> hist(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++hist[rng.uniform_index(7)];
    for (int h : hist) EXPECT_NEAR(h, n / 7.0, 5 * std::sqrt(n / 7.0));
}

TEST(CounterRng, ExponentialMean) {
    CounterRng rng(4, 0);
    const int n = 200000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.exponential(2.5);
        ASSERT_GE(x, 0.0);
        sum += x;
    }
    // sd of the mean is 0.4 / sqrt(n)
    EXPECT_NEAR(sum / n, 0.4, 5 * 0.4 / std::sqrt(n));
}

TEST(CounterRng, Uniform01InUnitInterval) {
    CounterRng rng(5, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    EXPECT_EQ(CounterRng::scale_index(~0ull, 10), 9u);
    EXPECT_EQ(CounterRng::scale_index(0, 10), 0u);
}
