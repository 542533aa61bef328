#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "toy.hpp"
#include "ucl/dataplane.hpp"
#include "ucl/errors.hpp"
#include "ucl/sensing.hpp"

using namespace ucl;

namespace {

std::vector<Key> keys_for(std::size_t n, std::uint32_t offset = 0) {
    std::vector<Key> keys;
    for (std::size_t i = 0; i < n; ++i) keys.push_back(Key::from_u32(static_cast<std::uint32_t>(i + offset)));
    return keys;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

TEST(Apply, ZeroMapsToZero) {
    const SketchHasher h(3, 8, 1, SensingMode::count_min);
    const auto keys = keys_for(20);
    const SketchOperator a(h, keys);
    for (double v : a.apply(std::vector<double>(20, 0.0))) EXPECT_EQ(v, 0.0);
    for (double v : a.apply_transpose(std::vector<double>(24, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(Apply, MatchesExplicitDenseProduct) {
    for (auto mode : {SensingMode::count_min, SensingMode::count_sketch}) {
        const SketchHasher h(2, 2, 5, mode);
        const auto keys = keys_for(3);
        const SketchOperator a(h, keys);
        // Dense oracle assembled straight from the hasher.
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(4, 3);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 2; ++j) dense(j * 2 + h.column(j, keys[i]), i) += h.sign(j, keys[i]);
        }
        const Eigen::Vector3d x(1, 2, 3);
        const Eigen::VectorXd expect = dense * x;
        const auto got = a.apply(std::vector<double>{1, 2, 3});
        for (int r = 0; r < 4; ++r) EXPECT_DOUBLE_EQ(got[r], expect(r));
    }
}

TEST(Apply, LengthMismatchThrows) {
    const SketchHasher h(2, 4, 1, SensingMode::count_min);
    const auto keys = keys_for(5);
    const SketchOperator a(h, keys);
    EXPECT_THROW(a.apply(std::vector<double>(4, 0.0)), std::invalid_argument);
    EXPECT_THROW(a.apply_transpose(std::vector<double>(7, 0.0)), std::invalid_argument);
}

TEST(Apply, Linearity) {
    std::mt19937_64 rng(2);
    const SketchHasher h(4, 16, 3, SensingMode::count_sketch);
    const auto keys = keys_for(100);
    const SketchOperator a(h, keys);
    const auto x1 = random_vec(rng, 100), x2 = random_vec(rng, 100);
    std::vector<double> combo(100);
    for (int i = 0; i < 100; ++i) combo[i] = 2.5 * x1[i] + x2[i];
    const auto y1 = a.apply(x1), y2 = a.apply(x2), y = a.apply(combo);
    for (std::size_t r = 0; r < y.size(); ++r) EXPECT_NEAR(y[r], 2.5 * y1[r] + y2[r], 1e-12);
}

TEST(Apply, AdjointIdentity) {
    std::mt19937_64 rng(3);
    for (auto mode : {SensingMode::count_min, SensingMode::count_sketch}) {
        const SketchHasher h(5, 32, 7, mode);
        const auto keys = keys_for(300);
        const SketchOperator a(h, keys);
        for (int t = 0; t < 20; ++t) {
            const auto x = random_vec(rng, 300), y = random_vec(rng, 160);
            const double lhs = dot(a.apply(x), y);
            const double rhs = dot(x, a.apply_transpose(y));
            EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST(Apply, TransposeOfOnesIsDepth) {
    const SketchHasher h(6, 8, 3, SensingMode::count_min);
    const auto keys = keys_for(50);
    const SketchOperator a(h, keys);
    for (double v : a.apply_transpose(std::vector<double>(48, 1.0))) EXPECT_EQ(v, 6.0);
}

TEST(Apply, StreamIdentityOnEverySnapshot) {
    std::mt19937_64 rng(4);
    SketchConfig cfg;
    cfg.depth = 3;
    cfg.width = 32;
    cfg.hf_slots = 16;
    cfg.bf_bits = 8192;
    cfg.bf_hashes = 4;
    cfg.sampling_interval = 100;
    DataPlane dp(cfg, 77);
    std::map<Key, Count> truth;
    for (const auto& it : test::random_stream(rng, 1000, 200, 4)) {
        truth[it.key] += it.value;
        dp.update(it);
        if (auto snap = dp.maybe_snapshot()) {
            std::vector<Key> keys;
            std::vector<std::int64_t> x;
            for (const auto& [k, f] : truth) {
                keys.push_back(k);
                x.push_back(static_cast<std::int64_t>(f - dp.hf_query(k)));
            }
            const SketchOperator a(dp.hasher(), keys);
            const auto y = a.apply_exact(x);
            ASSERT_EQ(y.size(), snap->counters.size());
            for (std::size_t r = 0; r < y.size(); ++r) ASSERT_EQ(y[r], static_cast<std::int64_t>(snap->counters[r]));
        }
    }
    EXPECT_EQ(dp.snapshot_count(), 10u);
}

TEST(Materialize, AgreesWithApplyOnBasis) {
    for (auto mode : {SensingMode::count_min, SensingMode::count_sketch}) {
        const SketchHasher h(3, 5, 9, mode);
        const auto keys = keys_for(25);
        const SketchOperator a(h, keys);
        const auto m = a.materialize();
        for (std::size_t i = 0; i < 25; ++i) {
            std::vector<double> e(25, 0.0);
            e[i] = 1;
            const auto col = a.apply(e);
            int nonzero = 0;
            for (std::size_t r = 0; r < 15; ++r) {
                EXPECT_EQ(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)), col[r]);
                const double v = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
                EXPECT_TRUE(v == 0 || v == 1 || (mode == SensingMode::count_sketch && v == -1));
                nonzero += v != 0;
            }
            EXPECT_EQ(nonzero, 3);
        }
    }
}

TEST(Materialize, SizeGuard) {
    const SketchHasher h(2, 4, 9, SensingMode::count_min);
    const auto keys = keys_for(30);
    const SketchOperator a(h, keys);
    EXPECT_THROW(a.materialize(10, 100), std::length_error);
    EXPECT_THROW(a.materialize(100, 4), std::length_error);
}

TEST(Rank, UnderdeterminedWithoutTransforms) {
    const SketchHasher h(2, 4, 9, SensingMode::count_min);
    const auto keys = keys_for(12);
    const auto a = SketchOperator(h, keys).materialize();
    const auto r = rank_diagnostic(a, {});
    EXPECT_FALSE(r.full_rank);
    EXPECT_LE(r.rank, 8u);
}

TEST(Rank, InvertibleSquare) {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd a(8, 8);
    std::normal_distribution<double> g;
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    const auto r = rank_diagnostic(a, {});
    EXPECT_EQ(r.rank, 8u);
    EXPECT_TRUE(r.full_rank);
    EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Identity(6, 6)), 6u);
}

TEST(Rank, MatchesEigenOnLowRankProducts) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    for (int k = 1; k <= 7; ++k) {
        Eigen::MatrixXd u(9, k), v(k, 11);
        for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = g(rng);
        for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
        EXPECT_EQ(numerical_rank(u * v), static_cast<std::size_t>(k));
    }
}

TEST(Rank, SizeGuard) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(100, 100);
    std::vector<Eigen::MatrixXd> t(3, Eigen::MatrixXd::Identity(100, 100));
    EXPECT_THROW(rank_diagnostic(a, t, 10'000), std::length_error);
}

TEST(MapEstimate, ZeroVarianceReturnsPriorMean) {
    const std::vector<double> y{3, 9, 4, 1};
    const std::vector<std::uint32_t> pos{1, 2};
    EXPECT_DOUBLE_EQ(map_estimate(pos, y, MapPrior{.mu = 7.5, .sigma2 = 0, .l1 = 20, .l2sq = 90}, 2, 2), 7.5);
}

TEST(MapEstimate, VanishingNormLimit) {
    const std::vector<double> y{3, 9, 4, 1, 6, 2};
    const std::vector<std::uint32_t> pos{1, 3, 4};
    const double d = 3, w = 2, l1 = 5;
    const double limit = (w * (9 + 1 + 6) - d * l1) / (d * (w - 1));
    const double got = map_estimate(pos, y, MapPrior{.mu = 100, .sigma2 = 4, .l1 = l1, .l2sq = 1e-12}, 3, 2);
    EXPECT_NEAR(got, limit, 1e-9);
}

TEST(MapEstimate, InvalidPrior) {
    const std::vector<double> y{1, 1};
    const std::vector<std::uint32_t> pos{0};
    EXPECT_THROW(map_estimate(pos, y, MapPrior{.mu = 0, .sigma2 = -1, .l1 = 1, .l2sq = 1}, 1, 2), ConfigError);
    EXPECT_THROW(map_estimate(pos, y, MapPrior{.mu = 0, .sigma2 = 1, .l1 = 1, .l2sq = 0}, 1, 2), ConfigError);
}

TEST(MapEstimate, MatchesNumericPosteriorMaximum) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 50; ++t) {
        const auto inst = oracle::map_instance(rng);
        const double closed = map_estimate(inst.positions, inst.y, inst.prior, inst.depth, inst.width);
        std::vector<double> counters;
        for (auto p : inst.positions) counters.push_back(inst.y[p]);
        const double lim = 0.999 * std::sqrt(inst.prior.l2sq);
        const double numeric = oracle::numeric_map(counters, inst.prior, inst.width, -lim, lim);
        EXPECT_LT(std::abs(closed - numeric) / std::abs(numeric), 1e-2) << "instance " << t;
    }
}

TEST(Rank, ToyTransformsAgreeWithLu) {
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto inst = toy::rank_instance(s, 4);
        Eigen::MatrixXd b(40, 12);
        b.topRows(8) = inst.a;
        for (std::size_t p = 0; p < 4; ++p) b.middleRows(8 * static_cast<Eigen::Index>(p + 1), 8) = inst.a * inst.transforms[p];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
        lu.setThreshold(1e-9);
        EXPECT_EQ(rank_diagnostic(inst.a, inst.transforms).rank, static_cast<std::size_t>(lu.rank())) << "seed " << s;
        EXPECT_LE(rank_diagnostic(inst.a, {}).rank, 8u);
    }
}
