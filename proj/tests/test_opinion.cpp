#include <gtest/gtest.h>

#include <vector>

#include "test_support.hpp"

using namespace fairpool;
using fairpool::testing::BinaryScm;

namespace {

std::size_t copy0(const std::vector<std::size_t>& v) { return v[0]; }

ScmModel one_root(double p_one) { return BinaryScm().root("U", p_one).var("A", {"U"}, copy0).build(); }

std::vector<double> random_distribution(Rng& rng, std::size_t k) {
    std::vector<double> p(k);
    double total = 0.0;
    for (auto& x : p) total += (x = rng.uniform() + 1e-3);
    for (auto& x : p) x /= total;
    return p;
}

}  // namespace

TEST(WeightVector, Validation) {
    EXPECT_NO_THROW(WeightVector({0.25, 0.75}));
    EXPECT_THROW(WeightVector({}), ValidationError);
    EXPECT_THROW(WeightVector({0.5, 0.6}), ValidationError);
    EXPECT_THROW(WeightVector({1.5, -0.5}), ValidationError);
    EXPECT_DOUBLE_EQ(WeightVector::uniform(4)[3], 0.25);
}

TEST(LinearPool, ArithmeticMean) {
    auto out = linear_pool({{0.2, 0.8}, {0.6, 0.4}}, WeightVector::uniform(2));
    EXPECT_NEAR(out[0], 0.4, 1e-12);
    EXPECT_NEAR(out[1], 0.6, 1e-12);
}

TEST(LinearPool, DictatorWeight) {
    std::vector<std::vector<double>> dists{{0.1, 0.2, 0.7}, {0.5, 0.5, 0.0}, {0.3, 0.3, 0.4}};
    EXPECT_EQ(linear_pool(dists, WeightVector({1.0, 0.0, 0.0})), dists[0]);
}

TEST(LinearPool, ThreeExpertsByHand) {
    // 0.5*0.1 + 0.3*0.5 + 0.2*0.3 = 0.26, 0.5*0.2 + 0.3*0.5 + 0.2*0.3 = 0.31
    auto out = linear_pool({{0.1, 0.2, 0.7}, {0.5, 0.5, 0.0}, {0.3, 0.3, 0.4}}, WeightVector({0.5, 0.3, 0.2}));
    EXPECT_NEAR(out[0], 0.26, 1e-12);
    EXPECT_NEAR(out[1], 0.31, 1e-12);
    EXPECT_NEAR(out[2], 0.43, 1e-12);
}

TEST(LinearPool, Errors) {
    EXPECT_THROW(linear_pool({{0.5, 0.5}, {1.0}}, WeightVector::uniform(2)), ValidationError);
    EXPECT_THROW(linear_pool({{0.5, 0.5}}, WeightVector::uniform(2)), ValidationError);
    EXPECT_THROW(linear_pool({{0.5, 0.6}, {0.5, 0.5}}, WeightVector::uniform(2)), ValidationError);
}

TEST(PoolRoots, TwoExpertsEqualWeights) {
    auto out = pool_root_distributions({one_root(0.3), one_root(0.5)}, WeightVector::uniform(2));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_NEAR(out.at("U")[1], 0.4, 1e-12);
}

TEST(PoolRoots, SingleExpertIsIdentity) {
    auto m = one_root(0.35);
    EXPECT_EQ(pool_root_distributions({m}, WeightVector::uniform(1)), m.exogenous_distribution());
}

TEST(PoolRoots, MismatchedRootsRejected) {
    auto other = BinaryScm().root("V", 0.5).var("A", {"V"}, copy0).build();
    EXPECT_THROW(pool_root_distributions({one_root(0.3), other}, WeightVector::uniform(2)), ValidationError);
}

TEST(LinearPoolProperty, EventWiseIndependence) {
    Rng rng(41);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.index(4), k = 2 + rng.index(4);
        std::vector<std::vector<double>> dists;
        for (std::size_t i = 0; i < n; ++i) dists.push_back(random_distribution(rng, k));
        auto w = random_distribution(rng, n);
        auto base = linear_pool(dists, WeightVector(w));
        // Move mass between the other entries, leaving entry 0 untouched.
        auto perturbed = dists;
        for (auto& d : perturbed) {
            double rest = 1.0 - d[0];
            auto fresh = random_distribution(rng, k - 1);
            for (std::size_t x = 1; x < k; ++x) d[x] = rest * fresh[x - 1];
        }
        EXPECT_NEAR(linear_pool(perturbed, WeightVector(w))[0], base[0], 1e-12);
        double total = 0.0;
        for (double p : base) total += p;
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(LinearPoolProperty, UnanimityPreservation) {
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.index(5);
        auto p = random_distribution(rng, 2 + rng.index(4));
        auto out = linear_pool(std::vector<std::vector<double>>(n, p), WeightVector(random_distribution(rng, n)));
        for (std::size_t x = 0; x < p.size(); ++x) EXPECT_NEAR(out[x], p[x], 1e-12);
    }
}
