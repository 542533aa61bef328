#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "support.hpp"
#include "ucl/config.hpp"
#include "ucl/errors.hpp"
#include "ucl/hash.hpp"
#include "ucl/key.hpp"

using namespace ucl;

TEST(Hash, SingleBucketIsZero) {
    const auto fam = HashFamily::derive(42, SeedSpace::sketch_row, 1);
    EXPECT_EQ(fam.hash(0, Key::from_hex("41414141"), 1), 0u);
}

TEST(Hash, Deterministic) {
    const auto fam = HashFamily::derive(42, SeedSpace::sketch_row, 1);
    const auto k = Key::from_hex("41414141");
    EXPECT_EQ(fam.hash(0, k, 16), fam.hash(0, k, 16));
    const auto again = HashFamily::derive(42, SeedSpace::sketch_row, 1);
    EXPECT_EQ(fam.hash(0, k), again.hash(0, k));
}

TEST(Hash, UniformOverRange) {
    const auto fam = HashFamily::derive(7, SeedSpace::sketch_row, 1);
    std::mt19937_64 rng(3);
    std::vector<std::size_t> counts(512, 0);
    for (int i = 0; i < 100000; ++i) ++counts[fam.hash(0, test::random_key(rng), 512)];
    EXPECT_GT(test::chi_square_uniform_p(counts), 0.01);
}

TEST(Hash, RangeSafetyFuzz) {
    std::mt19937_64 rng(11);
    const auto fam = HashFamily::derive(rng(), SeedSpace::bloom, 8);
    for (int i = 0; i < 20000; ++i) {
        const auto range = 1 + rng() % 100000;
        const auto key = test::random_key(rng, 1 + rng() % Key::kMaxLen);
        EXPECT_LT(fam.hash(rng() % 8, key, range), range);
    }
}

TEST(Hash, IndexOutOfBoundsIsConfigError) {
    const auto fam = HashFamily::derive(1, SeedSpace::sketch_row, 2);
    EXPECT_THROW(fam.hash(2, Key::from_u32(1), 4), ConfigError);
    EXPECT_THROW(fam.hash(0, Key::from_u32(1), 0), ConfigError);
}

TEST(Hash, SeedSpacesAreSeparate) {
    std::set<std::uint64_t> seen;
    for (auto space : {SeedSpace::heavy_filter, SeedSpace::sketch_row, SeedSpace::bloom, SeedSpace::sign}) {
        for (std::uint64_t i = 0; i < 16; ++i) seen.insert(derive_seed(99, space, i));
    }
    EXPECT_EQ(seen.size(), 64u);
}

TEST(Key, HexRoundTrip) {
    const auto k = Key::from_hex("00ff10Ab");
    EXPECT_EQ(k.size(), 4u);
    EXPECT_EQ(k.to_hex(), "00ff10ab");
    EXPECT_EQ(Key::from_u32(0x01020304).to_hex(), "01020304");
    EXPECT_THROW(Key::from_hex("abc"), FormatError);
    EXPECT_THROW(Key::from_hex("zz"), FormatError);
}

TEST(Key, ThirteenByteKeys) {
    const auto k = Key::from_hex("0102030405060708090a0b0c0d");
    EXPECT_EQ(k.size(), 13u);
    EXPECT_NE(k, Key::from_hex("0102030405060708090a0b0c0e"));
}

TEST(Config, Presets) {
    const auto small = preset("16KB");
    EXPECT_EQ(small.sketch.hf_slots, 500u);
    EXPECT_EQ(small.sketch.depth, 4u);
    EXPECT_EQ(small.sketch.width, 512u);
    const auto large = preset("128KB");
    EXPECT_EQ(large.sketch.hf_slots, 6000u);
    EXPECT_EQ(large.sketch.depth, 8u);
    EXPECT_EQ(large.sketch.width, 1024u);
    EXPECT_EQ(preset_names().size(), 8u);
    EXPECT_THROW(preset("7KB"), ConfigError);
}

TEST(Config, ZeroWidthNamesField) {
    nlohmann::json doc = {{"sketch", {{"width", 0}}}};
    try {
        parse_config(doc);
        FAIL() << "expected a validation error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("sketch.width"), std::string::npos);
    }
}

TEST(Config, UnknownFieldsRejected) {
    EXPECT_THROW(parse_config(nlohmann::json{{"sketch", {{"widht", 4}}}}), ConfigError);
    EXPECT_THROW(parse_config(nlohmann::json{{"extra", 1}}), ConfigError);
    EXPECT_THROW(parse_config(nlohmann::json{{"bloom", {{"bits", -3}}}}), ConfigError);
}

TEST(Config, MemoryAccountingIsExact) {
    SketchConfig s;
    s.depth = 4;
    s.width = 512;
    s.hf_slots = 500;
    s.bf_bits = 81920;
    s.key_len = 4;
    EXPECT_EQ(s.memory_bytes(), 81920u / 8 + 4u * 512 * 4 + 500u * (4 + 8));
    s.bf_bits = 81921;
    EXPECT_EQ(s.memory_bytes(), 10241u + 8192 + 6000);
    EXPECT_NEAR(s.epsilon_c(), std::exp(1.0) / 512, 1e-15);
    EXPECT_NEAR(s.delta_c(), std::exp(-4.0), 1e-15);
}

TEST(Config, FileRoundTrip) {
    Config cfg = preset("64KB");
    cfg.training.lambda = 0.25;
    cfg.buckets.length = 256;
    cfg.sketch.sensing = SensingMode::count_sketch;
    cfg.sketch.eviction_rule = EvictionRule::listing;
    const auto path = std::filesystem::temp_directory_path() / "ucl_cfg_roundtrip.json";
    {
        std::ofstream f(path);
        f << to_json(cfg).dump(2);
    }
    const auto back = load_config(path);
    EXPECT_EQ(to_json(back), to_json(cfg));
    std::filesystem::remove(path);
}
