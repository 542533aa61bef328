#include <gtest/gtest.h>

#include <map>
#include <random>

#include "support.hpp"
#include "ucl/controlplane.hpp"
#include "ucl/dataplane.hpp"
#include "ucl/hash.hpp"
#include "ucl/solver/transform.hpp"

using namespace ucl;

namespace {

KeyReport rep(std::uint32_t id, ReportFlag f, std::uint64_t seq) { return KeyReport{Key::from_u32(id), f, seq}; }

std::shared_ptr<const solver::SolverModel> small_model(std::uint32_t depth, std::uint32_t width) {
    return std::make_shared<const solver::SolverModel>(
        solver::ModelShape{.depth = depth, .width = width, .hidden = 8, .bucket_len = 4}, 5);
}

SketchConfig tiny_sketch() {
    SketchConfig c;
    c.depth = 2;
    c.width = 16;
    c.hf_slots = 1;
    c.bf_bits = 1024;
    c.sampling_interval = 10;
    return c;
}

} // namespace

TEST(Registry, ReportSemantics) {
    KeyRegistry r;
    r.handle_report(rep(1, ReportFlag::cold, 1));
    EXPECT_EQ(r.size(), 1u);
    EXPECT_EQ(r.position(Key::from_u32(1)), 0u);
    const auto v = r.version();
    r.handle_report(rep(1, ReportFlag::cold, 2));
    EXPECT_EQ(r.size(), 1u);
    EXPECT_EQ(r.version(), v);
    r.handle_report(rep(2, ReportFlag::cold, 3));
    r.handle_report(rep(1, ReportFlag::hot, 4));
    EXPECT_EQ(r.position(Key::from_u32(1)), 0u);
    EXPECT_TRUE(r.is_hot(0));
    EXPECT_FALSE(r.is_hot(1));
    EXPECT_EQ(r.hot_positions(), std::vector<std::size_t>{0});
    EXPECT_EQ(r.hot_count(), 1u);
    EXPECT_GT(r.version(), v);
    EXPECT_FALSE(r.position(Key::from_u32(3)));
}

TEST(Registry, PositionsNeverMove) {
    std::mt19937_64 rng(1);
    KeyRegistry r;
    std::map<Key, std::size_t> first;
    for (std::uint64_t s = 1; s <= 5000; ++s) {
        const auto id = static_cast<std::uint32_t>(rng() % 800);
        r.handle_report(rep(id, rng() % 3 == 0 ? ReportFlag::hot : ReportFlag::cold, s));
        const Key k = Key::from_u32(id);
        first.emplace(k, *r.position(k));
    }
    for (const auto& [k, p] : first) EXPECT_EQ(r.position(k), p);
    EXPECT_EQ(r.size(), first.size());
}

TEST(Buckets, DivMod) {
    EXPECT_EQ(bucket_of(513, 512), (std::pair<std::size_t, std::size_t>{1, 1}));
    EXPECT_EQ(bucket_of(511, 512), (std::pair<std::size_t, std::size_t>{0, 511}));
}

TEST(Query, HeavyFilterOnlyKey) {
    DataPlane plane(tiny_sketch(), 3);
    EXPECT_FALSE(plane.update(StreamItem{Key::from_u32(9), 7}));
    ControlPlane cp(4, small_model(2, 16));
    const auto ctx = cp.freeze_epoch(plane.heavy_filter());
    EXPECT_FALSE(ctx.snapshot());
    EXPECT_EQ(ctx.query(Key::from_u32(9)), 7u);
    EXPECT_EQ(ctx.query(Key::from_u32(10)), 0u);
}

TEST(Query, RegistryKeyCombinesSketchAndFilter) {
    DataPlane plane(tiny_sketch(), 4);
    ControlPlane cp(4, small_model(2, 16));
    std::mt19937_64 rng(2);
    std::optional<HeavyFilter> hf_at_snap;
    for (const auto& it : test::random_stream(rng, 200, 30, 3)) {
        if (auto r = plane.update(it)) cp.on_report(*r);
        if (auto s = plane.maybe_snapshot()) {
            cp.on_snapshot(*s);
            hf_at_snap = plane.heavy_filter();
        }
    }
    ASSERT_TRUE(hf_at_snap);
    const auto ctx = cp.freeze_epoch(*hf_at_snap);
    ASSERT_TRUE(ctx.snapshot());
    const auto& reg = ctx.registry();
    ASSERT_GT(reg.size(), 0u);
    const auto est = solver::recover_full(*cp.model(), *ctx.snapshot(), reg.size());
    for (std::size_t p = 0; p < reg.size(); ++p) {
        const Key k = reg.keys()[p];
        EXPECT_EQ(ctx.query(k), est[p] + hf_at_snap->query(k));
    }
    // Repeated queries on one context agree.
    const Key k0 = reg.keys()[0];
    const Count first = ctx.query(k0);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(ctx.query(k0), first);
}

TEST(Query, TotalOverArbitraryKeys) {
    DataPlane plane(tiny_sketch(), 5);
    ControlPlane cp(2, small_model(2, 16));
    std::mt19937_64 rng(3);
    const auto ctx = cp.freeze_epoch(plane.heavy_filter());
    for (int i = 0; i < 200; ++i) EXPECT_EQ(ctx.query(test::random_key(rng, 1 + rng() % 13)), 0u);
}

TEST(ControlPlaneTest, WindowAndPublish) {
    ControlPlane cp(2, small_model(1, 4));
    for (std::uint64_t i = 1; i <= 3; ++i) {
        Snapshot s;
        s.seq = i;
        cp.on_snapshot(s);
    }
    EXPECT_EQ(cp.window_size(), 2u);
    EXPECT_EQ(cp.latest_snapshot()->seq, 3u);
    const auto view = cp.training_view();
    EXPECT_EQ(view.window[0].seq, 2u);
    auto m2 = small_model(1, 4);
    cp.publish(m2);
    EXPECT_EQ(cp.model(), m2);
}
