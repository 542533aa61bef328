#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ucl/errors.hpp"
#include "ucl/metrics.hpp"

using namespace ucl;

namespace {
const std::vector<Count> kTruth{5, 3};
const std::vector<double> kEst{4, 4};
} // namespace

TEST(Aae, HandCases) {
    EXPECT_DOUBLE_EQ(aae(kTruth, kEst), 1.0);
    EXPECT_EQ(aae(kTruth, std::vector<double>{5, 3}), 0.0);
    EXPECT_DOUBLE_EQ(aae(kTruth, std::vector<double>{0, 0}), 4.0);
}

TEST(Are, HandCases) {
    EXPECT_NEAR(are(kTruth, kEst), (0.2 + 1.0 / 3.0) / 2, 1e-15);
    EXPECT_EQ(are(kTruth, std::vector<double>{5, 3}), 0.0);
    EXPECT_DOUBLE_EQ(are(kTruth, std::vector<double>{10, 6}), 1.0);
}

TEST(Metrics, ZeroTruthKeysSkipped) {
    const std::vector<Count> t{5, 0, 3};
    EXPECT_DOUBLE_EQ(aae(t, std::vector<double>{4, 100, 4}), 1.0);
}

TEST(Metrics, EmptyTruthThrows) {
    const std::vector<Count> t{0, 0};
    const std::vector<double> e{1, 1};
    EXPECT_THROW(aae(t, e), MetricError);
    EXPECT_THROW(are(t, e), MetricError);
    EXPECT_THROW(wmrd(Histogram{}, Histogram{}), MetricError);
}

TEST(Wmrd, HandCases) {
    const Histogram a{{1, 2}, {2, 1}};
    const Histogram b{{1, 1}, {2, 2}};
    EXPECT_EQ(wmrd(a, a), 0.0);
    EXPECT_NEAR(wmrd(a, b), 2.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(wmrd(Histogram{{1, 4}}, Histogram{{7, 3}}), 2.0);
}

TEST(Entropy, HandCases) {
    EXPECT_EQ(histogram_entropy(Histogram{{1, 5}}), 0.0);
    EXPECT_DOUBLE_EQ(histogram_entropy(Histogram{{1, 1}, {2, 1}}), 1.5);
    EXPECT_EQ(entropy_abs_err(kTruth, std::vector<double>{5, 3}), 0.0);
}

TEST(Rounding, HalvesUp) {
    EXPECT_EQ(round_estimate(2.5), 3u);
    EXPECT_EQ(round_estimate(2.49), 2u);
    EXPECT_EQ(round_estimate(-3.0), 0u);
    const std::vector<Count> t{3, 3};
    EXPECT_EQ(wmrd(t, std::vector<double>{2.5, 3.4}), 0.0);
}

TEST(Metrics, PermutationInvariance) {
    std::mt19937_64 rng(4);
    std::vector<Count> t(300);
    std::vector<double> e(300);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = 1 + rng() % 50;
        e[i] = static_cast<double>(rng() % 60);
    }
    const auto base = evaluate(t, e);
    std::vector<std::size_t> idx(t.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Count> t2;
    std::vector<double> e2;
    for (auto i : idx) {
        t2.push_back(t[i]);
        e2.push_back(e[i]);
    }
    const auto perm = evaluate(t2, e2);
    EXPECT_NEAR(perm.aae, base.aae, 1e-12);
    EXPECT_NEAR(perm.are, base.are, 1e-12);
    EXPECT_EQ(perm.wmrd, base.wmrd);
    EXPECT_EQ(perm.entropy, base.entropy);
    const std::vector<double> exact(t.begin(), t.end());
    const auto zero = evaluate(t, exact);
    EXPECT_EQ(zero.aae + zero.are + zero.wmrd + zero.entropy, 0.0);
}

TEST(Align, MissingEstimatesAreZero) {
    FrequencyTable truth{{Key::from_u32(2), 4}, {Key::from_u32(1), 6}};
    FrequencyTable est{{Key::from_u32(1), 5}, {Key::from_u32(9), 1}};
    const auto a = align(truth, est);
    ASSERT_EQ(a.keys.size(), 2u);
    EXPECT_EQ(a.keys[0], Key::from_u32(1));
    EXPECT_EQ(a.truth, (std::vector<Count>{6, 4}));
    EXPECT_EQ(a.est, (std::vector<double>{5, 0}));
}

TEST(Throughput, Basics) {
    EXPECT_DOUBLE_EQ(throughput(2'000'000, 1.0), 2.0);
    EXPECT_LT(throughput(1000, 1.0), throughput(2000, 1.0));
    EXPECT_THROW(throughput(10, 0.0), std::invalid_argument);
}
