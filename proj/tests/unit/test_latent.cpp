#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "exarray/latent.hpp"

using namespace exarray;

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> singletons(std::uint64_t seed, std::uint64_t first, std::uint64_t count) {
    std::vector<double> out;
    out.reserve(count);
    for (std::uint64_t i = first; i < first + count; ++i) out.push_back(latent(seed, SubsetKey({i}, 2)));
    return out;
}

} // namespace

TEST(Latent, RepeatedQueryIsBitIdentical) {
    const SubsetKey k({1, 2}, 2);
    EXPECT_EQ(latent(42, k), latent(42, k));
}

TEST(Latent, PresentationOrderIsIrrelevant) {
    EXPECT_EQ(latent(42, SubsetKey::from_unordered({2, 1}, 2)), latent(42, SubsetKey({1, 2}, 2)));
    EXPECT_EQ(latent(7, SubsetKey::from_unordered({9, 3, 5}, 3)), latent(7, SubsetKey({3, 5, 9}, 3)));
}

TEST(Latent, NonCanonicalKeysAreRejected) {
    EXPECT_THROW(SubsetKey({2, 1}, 2), CanonicalizationError);
    EXPECT_THROW(SubsetKey({3, 3}, 2), CanonicalizationError);
    EXPECT_THROW(SubsetKey::from_unordered({4, 4}, 2), CanonicalizationError);
    EXPECT_THROW(SubsetKey({1, 2, 3}, 2), ArityError);
}

TEST(Latent, ValuesLieInUnitInterval) {
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double v = latent(i * 31 + 5, SubsetKey({i}, 1));
        ASSERT_GE(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
}

TEST(Latent, SingletonMeanIsOneHalf) {
    const auto v = singletons(12345, 1, 100000);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    EXPECT_NEAR(mean, 0.5, 0.005);
}

TEST(Latent, SingletonVarianceIsOneTwelfth) {
    const auto v = singletons(99, 1, 100000);
    double mean = 0, sq = 0;
    for (double x : v) {
        mean += x;
        sq += x * x;
    }
    mean /= 1e5;
    const double var = sq / 1e5 - mean * mean;
    // sd of the sample variance of U(0,1) is sqrt(1/180)/sqrt(n) ~ 2.4e-4
    EXPECT_NEAR(var, 1.0 / 12.0, 1.5e-3);
}

TEST(Latent, ConsecutiveIndicesAreUncorrelated) {
    const auto v = singletons(2024, 1, 100001);
    const std::vector<double> a(v.begin(), v.end() - 1);
    const std::vector<double> b(v.begin() + 1, v.end());
    EXPECT_LE(std::abs(pearson(a, b)), 0.01);
}

TEST(Latent, DistinctSeedsAreUncorrelated) {
    const auto a = singletons(1, 1, 100000);
    const auto b = singletons(2, 1, 100000);
    EXPECT_LE(std::abs(pearson(a, b)), 0.01);
}

TEST(Latent, SubsetLevelsAreSeparated) {
    // xi[{i}] and xi[{i, i+1}] must not be functions of each other.
    std::vector<double> a, b;
    for (std::uint64_t i = 1; i <= 100000; ++i) {
        a.push_back(latent(5, SubsetKey({i}, 2)));
        b.push_back(latent(5, SubsetKey({i, i + 1}, 2)));
    }
    EXPECT_LE(std::abs(pearson(a, b)), 0.01);
}

TEST(Latent, EmptyKeyIsAValidLatent) {
    const double g = latent(3, SubsetKey::empty(2));
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, 1.0);
    EXPECT_NE(g, latent(4, SubsetKey::empty(2)));
}

TEST(Latent, MantissaHasAtLeast52Bits) {
    // Values are multiples of 2^-53; across many draws some need the last bit.
    bool odd = false;
    for (std::uint64_t i = 0; i < 64 && !odd; ++i) {
        const double scaled = std::ldexp(latent(11, SubsetKey({i}, 1)), 53);
        ASSERT_EQ(scaled, std::floor(scaled));
        odd = std::fmod(scaled, 2.0) == 1.0;
    }
    EXPECT_TRUE(odd);
}

TEST(LatentFamily, ArityOneHasTwoLatents) {
    const auto fam = latent_family(9, SubsetKey({5}, 1));
    EXPECT_EQ(fam.size(), 2u);
    EXPECT_EQ(fam.at(0u), latent(9, SubsetKey::empty(1)));
    EXPECT_EQ(fam.at(1u), latent(9, SubsetKey({5}, 1)));
}

TEST(LatentFamily, ArityThreeHasEightLatents) {
    const auto fam = latent_family(9, SubsetKey({1, 2, 3}, 3));
    EXPECT_EQ(fam.size(), 8u);
    std::set<double> distinct;
    for (std::uint32_t m = 0; m < 8; ++m) distinct.insert(fam.at(m));
    EXPECT_EQ(distinct.size(), 8u);
}

TEST(LatentFamily, OverlappingEdgesShareLowerOrderLatents) {
    const auto a = latent_family(77, SubsetKey({1, 2}, 2));
    const auto b = latent_family(77, SubsetKey({1, 3}, 2));
    const SubsetKey one({1}, 2);
    EXPECT_EQ(a.at(one), b.at(one));
    EXPECT_EQ(a.at(SubsetKey::empty(2)), b.at(SubsetKey::empty(2)));
    EXPECT_NE(a.at(SubsetKey({2}, 2)), b.at(SubsetKey({3}, 2)));
}

TEST(LatentFamily, WrongEdgeSizeIsAnArityError) {
    EXPECT_THROW(latent_family(1, SubsetKey({1}, 2)), ArityError);
    EXPECT_THROW(latent_family(1, SubsetKey({1, 2}, 3)), ArityError);
}

TEST(LatentFamily, MissingLatentIsReported) {
    auto fam = latent_family(1, SubsetKey({1, 2}, 2));
    fam.erase(3);
    EXPECT_FALSE(fam.has(3));
    EXPECT_THROW(fam.at(3u), IncompleteAssignmentError);
}

TEST(LatentFamily, MaskAndKeyRoundTrip) {
    const auto fam = latent_family(4, SubsetKey({2, 5, 8}, 3));
    for (std::uint32_t m = 0; m < 8; ++m) EXPECT_EQ(fam.mask_of(fam.key_of(m)), m);
    EXPECT_THROW(fam.mask_of(SubsetKey({3}, 3)), DomainError);
}

TEST(LatentField, PinnedGlobalOnlyAffectsTheEmptySet) {
    const LatentField free{8};
    const LatentField pinned{8, 0.25};
    const std::vector<std::uint64_t> e{2, 4};
    const auto a = free.family(e);
    const auto b = pinned.family(e);
    EXPECT_EQ(b.at(0u), 0.25);
    for (std::uint32_t m = 1; m < 4; ++m) EXPECT_EQ(a.at(m), b.at(m));
}

TEST(DeriveSeed, DependsOnEveryInput) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t p = 0; p < 4; ++p) {
        for (std::uint64_t t = 0; t < 4; ++t) {
            for (std::uint64_t c = 0; c < 4; ++c) seen.insert(derive_seed(p, t, c));
        }
    }
    EXPECT_EQ(seen.size(), 64u);
}
