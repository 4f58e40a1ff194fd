#include <gtest/gtest.h>

#include <set>

#include "deepratio/rng.hpp"

using namespace deepratio;

TEST(Rng, DeriveSeedIsDeterministicAndSeparatesStreams) {
    EXPECT_EQ(derive_seed(7, stream::kSimulation), derive_seed(7, stream::kSimulation));
    std::set<std::uint64_t> seen;
    for (std::uint64_t base = 0; base < 50; ++base)
        for (auto s : {stream::kSimulation, stream::kNetInit, stream::kShuffle, stream::kValidationSplit, stream::kLobSynth})
            seen.insert(derive_seed(base, s));
    EXPECT_EQ(seen.size(), 250u);
}

TEST(Rng, SameSeedSameDraws) {
    Rng a(3, stream::kShuffle), b(3, stream::kShuffle);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.uniform(), b.uniform());
        EXPECT_EQ(a.gaussian(), b.gaussian());
        EXPECT_EQ(a.exponential(2.0), b.exponential(2.0));
    }
}

TEST(Rng, UniformStaysInUnitInterval) {
    Rng r(11);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, Splitmix64KnownValue) {
    // first output of the reference splitmix64 generator seeded with 0
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}
