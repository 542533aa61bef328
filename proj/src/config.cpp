#include "ucl/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "ucl/errors.hpp"

namespace ucl {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& field, const std::string& rule) {
    if (!ok) throw ConfigError(field + " " + rule);
}

void reject_unknown(const json& section, const std::string& name, std::initializer_list<const char*> allowed) {
    if (!section.is_object()) throw ConfigError(name + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, _] : section.items()) {
        if (!ok.count(k)) throw ConfigError("unknown field " + name + "." + k);
    }
}

template<typename T>
void read(const json& section, const char* field, const std::string& section_name, T& out) {
    if (!section.contains(field)) return;
    const auto& v = section.at(field);
    try {
        if constexpr (std::is_same_v<T, bool>) {
            out = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError("");
            const auto raw = v.get<std::int64_t>();
            if (raw < 0) throw ConfigError("");
            out = static_cast<T>(raw);
        } else {
            out = v.get<T>();
        }
    } catch (const std::exception&) {
        throw ConfigError(section_name + "." + field + " has wrong type or sign");
    }
}

struct PresetRow {
    const char* name;
    std::uint32_t slots;
    std::uint32_t depth;
    std::uint32_t width;
};

constexpr std::array<PresetRow, 8> kPresets{{
    {"16KB", 500, 4, 512},
    {"32KB", 1500, 4, 512},
    {"48KB", 2000, 4, 1024},
    {"64KB", 3000, 4, 1024},
    {"80KB", 3500, 6, 1024},
    {"96KB", 4500, 6, 1024},
    {"112KB", 5500, 6, 1024},
    {"128KB", 6000, 8, 1024},
}};

} // namespace

void SketchConfig::validate() const {
    require(depth >= 1, "sketch.depth", "must be >= 1");
    require(depth <= 0xFFFF, "sketch.depth", "must fit in 16 bits");
    require(width >= 2, "sketch.width", "must be >= 2");
    require(hf_slots >= 1, "heavy_filter.slots", "must be >= 1");
    require(bf_bits >= 8, "bloom.bits", "must be >= 8");
    require(bf_hashes >= 1, "bloom.hashes", "must be >= 1");
    require(sampling_interval >= 1, "sketch.sampling_interval", "must be >= 1");
    require(key_len >= 1 && key_len <= 16, "sketch.key_len", "must be in [1, 16]");
}

std::uint64_t SketchConfig::memory_bytes() const {
    const std::uint64_t bloom = (std::uint64_t{bf_bits} + 7) / 8;
    const std::uint64_t counters = std::uint64_t{depth} * width * kCounterBytes;
    const std::uint64_t filter = std::uint64_t{hf_slots} * slot_bytes();
    return bloom + counters + filter;
}

double SketchConfig::epsilon_c() const { return std::numbers::e / width; }
double SketchConfig::delta_c() const { return std::exp(-static_cast<double>(depth)); }

void TrainConfig::validate() const {
    require(std::isfinite(lambda) && lambda >= 0, "training.lambda", "must be >= 0");
    require(epochs >= 1, "training.epochs", "must be >= 1");
    require(patience >= 1, "training.patience", "must be >= 1");
    require(batch_size >= 1, "training.batch_size", "must be >= 1");
    require(window_len >= 1, "training.window_len", "must be >= 1");
    require(std::isfinite(lr) && lr > 0, "training.lr", "must be > 0");
    require(std::isfinite(cold_fraction) && cold_fraction >= 0 && cold_fraction <= 1,
            "training.cold_fraction", "must be in [0, 1]");
}

void BucketConfig::validate() const {
    require(length >= 1, "buckets.length", "must be >= 1");
    require(hidden >= 2 && hidden % 2 == 0, "buckets.hidden", "must be even and >= 2");
}

void Config::validate() const {
    sketch.validate();
    training.validate();
    buckets.validate();
}

Config parse_config(const json& doc) {
    reject_unknown(doc, "config", {"name", "sketch", "bloom", "heavy_filter", "training", "buckets"});
    Config cfg;
    if (doc.contains("name")) cfg.name = doc.at("name").get<std::string>();

    if (doc.contains("sketch")) {
        const auto& s = doc.at("sketch");
        reject_unknown(s, "sketch", {"depth", "width", "sampling_interval", "key_len", "sensing"});
        read(s, "depth", "sketch", cfg.sketch.depth);
        read(s, "width", "sketch", cfg.sketch.width);
        read(s, "sampling_interval", "sketch", cfg.sketch.sampling_interval);
        read(s, "key_len", "sketch", cfg.sketch.key_len);
        if (s.contains("sensing")) {
            const auto mode = s.at("sensing").get<std::string>();
            if (mode == "count_min") cfg.sketch.sensing = SensingMode::count_min;
            else if (mode == "count_sketch") cfg.sketch.sensing = SensingMode::count_sketch;
            else throw ConfigError("sketch.sensing must be count_min or count_sketch");
        }
    }
    if (doc.contains("bloom")) {
        const auto& b = doc.at("bloom");
        reject_unknown(b, "bloom", {"bits", "hashes"});
        read(b, "bits", "bloom", cfg.sketch.bf_bits);
        read(b, "hashes", "bloom", cfg.sketch.bf_hashes);
    }
    if (doc.contains("heavy_filter")) {
        const auto& h = doc.at("heavy_filter");
        reject_unknown(h, "heavy_filter", {"slots", "eviction_rule"});
        read(h, "slots", "heavy_filter", cfg.sketch.hf_slots);
        if (h.contains("eviction_rule")) {
            const auto rule = h.at("eviction_rule").get<std::string>();
            if (rule == "prose") cfg.sketch.eviction_rule = EvictionRule::prose;
            else if (rule == "listing") cfg.sketch.eviction_rule = EvictionRule::listing;
            else throw ConfigError("heavy_filter.eviction_rule must be prose or listing");
        }
    }
    if (doc.contains("training")) {
        const auto& t = doc.at("training");
        reject_unknown(t, "training", {"lambda", "epochs", "patience", "batch_size", "window_len", "lr",
                                       "hot_increment", "cold_fraction", "equivariance"});
        read(t, "lambda", "training", cfg.training.lambda);
        read(t, "epochs", "training", cfg.training.epochs);
        read(t, "patience", "training", cfg.training.patience);
        read(t, "batch_size", "training", cfg.training.batch_size);
        read(t, "window_len", "training", cfg.training.window_len);
        read(t, "lr", "training", cfg.training.lr);
        read(t, "hot_increment", "training", cfg.training.hot_increment);
        read(t, "cold_fraction", "training", cfg.training.cold_fraction);
        read(t, "equivariance", "training", cfg.training.equivariance);
    }
    if (doc.contains("buckets")) {
        const auto& b = doc.at("buckets");
        reject_unknown(b, "buckets", {"length", "hidden", "shared"});
        read(b, "length", "buckets", cfg.buckets.length);
        read(b, "hidden", "buckets", cfg.buckets.hidden);
        read(b, "shared", "buckets", cfg.buckets.shared);
    }
    cfg.validate();
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const Config& cfg) {
    return json{
        {"name", cfg.name},
        {"sketch",
         {{"depth", cfg.sketch.depth},
          {"width", cfg.sketch.width},
          {"sampling_interval", cfg.sketch.sampling_interval},
          {"key_len", cfg.sketch.key_len},
          {"sensing", std::string(to_string(cfg.sketch.sensing))}}},
        {"bloom", {{"bits", cfg.sketch.bf_bits}, {"hashes", cfg.sketch.bf_hashes}}},
        {"heavy_filter",
         {{"slots", cfg.sketch.hf_slots}, {"eviction_rule", std::string(to_string(cfg.sketch.eviction_rule))}}},
        {"training",
         {{"lambda", cfg.training.lambda},
          {"epochs", cfg.training.epochs},
          {"patience", cfg.training.patience},
          {"batch_size", cfg.training.batch_size},
          {"window_len", cfg.training.window_len},
          {"lr", cfg.training.lr},
          {"hot_increment", cfg.training.hot_increment},
          {"cold_fraction", cfg.training.cold_fraction},
          {"equivariance", cfg.training.equivariance}}},
        {"buckets",
         {{"length", cfg.buckets.length}, {"hidden", cfg.buckets.hidden}, {"shared", cfg.buckets.shared}}},
    };
}

Config preset(std::string_view name) {
    for (const auto& row : kPresets) {
        if (name == row.name) {
            Config cfg;
            cfg.name = row.name;
            cfg.sketch.hf_slots = row.slots;
            cfg.sketch.depth = row.depth;
            cfg.sketch.width = row.width;
            return cfg;
        }
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& row : kPresets) out.emplace_back(row.name);
    return out;
}

std::string_view to_string(EvictionRule r) { return r == EvictionRule::prose ? "prose" : "listing"; }
std::string_view to_string(SensingMode m) { return m == SensingMode::count_min ? "count_min" : "count_sketch"; }

} // namespace ucl
