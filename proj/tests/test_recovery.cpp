#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "support.hpp"
#include "ucl/recovery.hpp"
#include "ucl/sensing.hpp"

using namespace ucl;

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

double norm2(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> sparse_vector(std::mt19937_64& rng, std::size_t n, std::size_t s) {
    std::vector<double> x(n, 0.0);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_real_distribution<double> mag(1.0, 10.0);
    for (std::size_t k = 0; k < s; ++k) x[idx[k]] = mag(rng);
    return x;
}

} // namespace

TEST(Lsqr, IdentitySystem) {
    const SketchHasher h(1, 3, 0, SensingMode::count_min);
    // Three keys on three distinct counters form an identity (up to column order).
    std::vector<Key> keys;
    std::vector<bool> used(3, false);
    for (std::uint32_t id = 0; keys.size() < 3; ++id) {
        const auto k = Key::from_u32(id);
        const auto c = h.column(0, k);
        if (!used[c]) {
            used[c] = true;
            keys.push_back(k);
        }
    }
    const SketchOperator a(h, keys);
    std::vector<double> y(3);
    for (std::size_t i = 0; i < 3; ++i) y[h.column(0, keys[i])] = static_cast<double>(i + 1);
    const auto r = lsqr(a, y);
    ASSERT_TRUE(r.converged);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.x_hat[i], static_cast<double>(i + 1), 1e-10);
}

TEST(Lsqr, ConsistentUnderdetermined) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const DenseOperator a(gaussian(rng, 8, 12));
        const auto xs = sparse_vector(rng, 12, 5);
        const auto y = a.apply(xs);
        const auto r = lsqr(a, y);
        EXPECT_LT(r.residual_l2, 1e-8);
        EXPECT_LE(norm2(r.x_hat), norm2(xs) + 1e-9);
    }
}

TEST(Lsqr, MinimumNormMatchesPseudoInverse) {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd m = gaussian(rng, 8, 12);
    const DenseOperator a(m);
    const auto xs = sparse_vector(rng, 12, 6);
    const auto y = a.apply(xs);
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 8);
    const Eigen::VectorXd pinv = m.completeOrthogonalDecomposition().solve(yv);
    const auto r = lsqr(a, y);
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(r.x_hat[i], pinv(i), 1e-8);
}

TEST(Lsqr, ResidualIsRecomputed) {
    std::mt19937_64 rng(3);
    const DenseOperator a(gaussian(rng, 10, 6));
    std::vector<double> y(10);
    for (auto& v : y) v = std::normal_distribution<double>()(rng);
    const auto r = lsqr(a, y, LsqrOptions{.max_iters = 2, .atol = 1e-12, .nonnegative = true});
    auto ax = a.apply(r.x_hat);
    for (std::size_t i = 0; i < y.size(); ++i) ax[i] -= y[i];
    EXPECT_NEAR(r.residual_l2, norm2(ax), 1e-12);
    for (double v : r.x_hat) EXPECT_GE(v, 0.0);
}

TEST(Omp, ZeroMeasurement) {
    std::mt19937_64 rng(4);
    const DenseOperator a(gaussian(rng, 16, 32));
    const auto r = omp(a, std::vector<double>(16, 0.0));
    EXPECT_EQ(r.iterations, 0u);
    for (double v : r.x_hat) EXPECT_EQ(v, 0.0);
}

TEST(Omp, TwoSparseExact) {
    std::mt19937_64 rng(5);
    const DenseOperator a(gaussian(rng, 16, 32));
    const auto xs = sparse_vector(rng, 32, 2);
    const auto r = omp(a, a.apply(xs));
    for (std::size_t i = 0; i < 32; ++i) EXPECT_NEAR(r.x_hat[i], xs[i], 1e-8);
    for (std::size_t i = 0; i < 32; ++i) {
        if (xs[i] != 0) EXPECT_NE(std::find(r.support.begin(), r.support.end(), i), r.support.end());
    }
}

TEST(Omp, ResidualHistoryIsMonotone) {
    std::mt19937_64 rng(6);
    const DenseOperator a(gaussian(rng, 24, 48));
    const auto xs = sparse_vector(rng, 48, 6);
    const auto r = omp(a, a.apply(xs));
    for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
        EXPECT_LE(r.residual_history[i], r.residual_history[i - 1] + 1e-12);
    }
}

TEST(Omp, DuplicateColumnsAreSkipped) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 3);
    m(0, 0) = 1;
    m(1, 0) = 1;
    m.col(1) = m.col(0);
    m(2, 2) = 1;
    const DenseOperator a(m);
    const auto r = omp(a, std::vector<double>{2, 2, 5, 0});
    EXPECT_LT(r.residual_l2, 1e-10);
    EXPECT_NEAR(r.x_hat[0] + r.x_hat[1], 2.0, 1e-10);
    EXPECT_NEAR(r.x_hat[2], 5.0, 1e-10);
}

TEST(CmQuery, NoCollisionExact) {
    CmCounters c(SketchHasher(4, 1024, 3, SensingMode::count_min));
    const auto k = Key::from_u32(77);
    c.insert(k, 3);
    EXPECT_EQ(cm_point_query(c, k), 3u);
}

TEST(CmQuery, SingleColumnIsTotal) {
    CmCounters c(SketchHasher(3, 1, 3, SensingMode::count_min));
    c.insert(Key::from_u32(1), 4);
    c.insert(Key::from_u32(2), 6);
    EXPECT_EQ(cm_point_query(c, Key::from_u32(9)), 10u);
}

TEST(CmQuery, NeverUnderestimates) {
    std::mt19937_64 rng(7);
    CmCounters c(SketchHasher(3, 32, 3, SensingMode::count_min));
    std::map<Key, Count> truth;
    for (const auto& it : test::random_stream(rng, 5000, 400, 3)) {
        truth[it.key] += it.value;
        c.insert(it.key, it.value);
    }
    for (const auto& [k, f] : truth) EXPECT_GE(cm_point_query(c, k), f);
}

TEST(CsQuery, NoCollisionExactAndMedianRule) {
    CmCounters c(SketchHasher(5, 4096, 3, SensingMode::count_sketch));
    const auto k = Key::from_u32(5);
    c.insert(k, 9);
    EXPECT_EQ(cs_point_query(c, k), 9);
    EXPECT_EQ(median_toward_zero({1, 5, 3}), 3);
    EXPECT_EQ(median_toward_zero({1, 2, 4, 8}), 3);
    EXPECT_EQ(median_toward_zero({-1, -2, -4, -8}), -3);
    EXPECT_EQ(median_toward_zero({-3, 0}), -1);
}

TEST(CsQuery, UnbiasedOverSeeds) {
    // Averaged over hash seeds, collisions cancel.
    std::mt19937_64 rng(8);
    const auto items = test::random_stream(rng, 2000, 100, 1);
    std::map<Key, Count> truth;
    for (const auto& it : items) truth[it.key] += it.value;
    const Key probe = items[0].key;
    double mean = 0;
    const int trials = 400;
    for (int s = 0; s < trials; ++s) {
        CmCounters c(SketchHasher(1, 16, static_cast<std::uint64_t>(s) + 100, SensingMode::count_sketch));
        for (const auto& it : items) c.insert(it.key, it.value);
        mean += static_cast<double>(cs_point_query(c, probe));
    }
    mean /= trials;
    EXPECT_NEAR(mean, static_cast<double>(truth[probe]), 0.2 * static_cast<double>(truth[probe]) + 5);
}
