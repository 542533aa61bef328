#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ucl {

/// Which branch of the heavy-filter vote evicts the resident key.
/// `prose`: evict when new - old <= 0 after the vote (keeps new > old).
/// `listing`: evict when new - old > 0, the literal branch of the update listing.
enum class EvictionRule { prose, listing };

/// Unsigned count-min counters, or count-sketch counters with +-1 row signs.
enum class SensingMode { count_min, count_sketch };

struct SketchConfig {
    std::uint32_t depth = 4;
    std::uint32_t width = 512;
    std::uint32_t hf_slots = 500;
    std::uint32_t bf_bits = 81920;
    std::uint32_t bf_hashes = 8;
    std::uint32_t sampling_interval = 1000;
    std::uint32_t key_len = 4;
    EvictionRule eviction_rule = EvictionRule::prose;
    SensingMode sensing = SensingMode::count_min;

    static constexpr std::uint32_t kCounterBytes = 4;

    /// Throws ConfigError naming the first violated field.
    void validate() const;

    std::uint64_t slot_bytes() const { return key_len + 2 * kCounterBytes; }
    /// Bloom bytes + counter bytes + heavy-filter bytes.
    std::uint64_t memory_bytes() const;
    std::uint32_t rows_times_width() const { return depth * width; }

    double epsilon_c() const;
    double delta_c() const;
};

struct TrainConfig {
    double lambda = 0.1;
    std::uint32_t epochs = 300;
    std::uint32_t patience = 30;
    std::uint32_t batch_size = 32;
    std::uint32_t window_len = 128;
    double lr = 0.001;
    /// Hot-key increment budget c of one transform; 0 means "use the sampling interval".
    std::uint64_t hot_increment = 0;
    double cold_fraction = 0.05;
    bool equivariance = true;

    void validate() const;
};

struct BucketConfig {
    std::uint32_t length = 512;
    std::uint32_t hidden = 128;
    bool shared = true;

    void validate() const;
};

struct Config {
    std::string name = "custom";
    SketchConfig sketch;
    TrainConfig training;
    BucketConfig buckets;

    void validate() const;
};

Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& cfg);

/// Memory presets "16KB" .. "128KB" (heavy filter slots, depth, width).
Config preset(std::string_view name);
std::vector<std::string> preset_names();

std::string_view to_string(EvictionRule r);
std::string_view to_string(SensingMode m);

} // namespace ucl
