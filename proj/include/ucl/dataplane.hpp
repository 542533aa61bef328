#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ucl/config.hpp"
#include "ucl/hash.hpp"
#include "ucl/key.hpp"

namespace ucl {

/// Per-row column (and sign) hashing shared by the counter array and the
/// sensing operator, so that both agree on where a key lands.
class SketchHasher {
public:
    SketchHasher(std::uint32_t depth, std::uint32_t width, std::uint64_t master_seed, SensingMode mode);

    std::uint32_t column(std::size_t row, const Key& key) const {
        return static_cast<std::uint32_t>(rows_.hash(row, key, width_));
    }
    /// +1 in count-min mode; a deterministic +-1 per (row, key) otherwise.
    int sign(std::size_t row, const Key& key) const {
        if (mode_ == SensingMode::count_min) return 1;
        return (signs_.hash(row, key) >> 63) ? -1 : 1;
    }

    std::uint32_t depth() const { return depth_; }
    std::uint32_t width() const { return width_; }
    SensingMode mode() const { return mode_; }
    /// Hash invocations per keyed counter update.
    std::uint32_t hashes_per_insert() const { return mode_ == SensingMode::count_min ? depth_ : 2 * depth_; }

private:
    std::uint32_t depth_;
    std::uint32_t width_;
    SensingMode mode_;
    HashFamily rows_;
    HashFamily signs_;
};

/// d x w counter grid. In count-sketch mode the cells hold two's-complement
/// int32 values stored in uint32 (wrap-around addition of sign * value).
class CmCounters {
public:
    explicit CmCounters(SketchHasher hasher);

    void insert(const Key& key, Count value);

    std::uint32_t at(std::size_t row, std::size_t col) const { return counts_[row * width() + col]; }
    std::int64_t value_at(std::size_t row, std::size_t col) const;
    std::span<const std::uint32_t> raw() const { return counts_; }
    /// Sum of a row under the mode's interpretation (signed in count-sketch mode).
    std::int64_t row_sum(std::size_t row) const;

    std::uint32_t depth() const { return hasher_.depth(); }
    std::uint32_t width() const { return hasher_.width(); }
    const SketchHasher& hasher() const { return hasher_; }

private:
    SketchHasher hasher_;
    std::vector<std::uint32_t> counts_;
};

class BloomFilter {
public:
    BloomFilter(std::uint32_t bits, HashFamily hashes);

    bool contains(const Key& key) const;
    void insert(const Key& key);
    /// Sets the key's bits; returns true when at least one bit was clear
    /// (the key was not already a member). One pass of k_b hashes.
    bool insert_if_absent(const Key& key);

    std::uint32_t bits() const { return bits_; }
    std::size_t hash_count() const { return hashes_.size(); }
    std::size_t popcount() const;

private:
    std::uint32_t bits_;
    HashFamily hashes_;
    std::vector<std::uint64_t> words_;
};

struct HeavyFilterSlot {
    std::optional<Key> key;
    std::uint32_t new_count = 0;
    std::uint32_t old_count = 0;

    bool empty() const { return !key.has_value(); }
};

class HeavyFilter {
public:
    HeavyFilter(std::uint32_t slots, HashFamily hash);

    std::size_t index_of(const Key& key) const { return hash_.hash(0, key, slots_.size()); }
    /// new_count when the key's slot holds exactly this key, else 0.
    Count query(const Key& key) const;

    HeavyFilterSlot& slot(std::size_t i) { return slots_[i]; }
    const HeavyFilterSlot& slot(std::size_t i) const { return slots_[i]; }
    std::span<const HeavyFilterSlot> slots() const { return slots_; }
    std::size_t size() const { return slots_.size(); }

private:
    HashFamily hash_;
    std::vector<HeavyFilterSlot> slots_;
};

enum class ReportFlag : std::uint8_t { cold = 0, hot = 1 };

struct KeyReport {
    Key key;
    ReportFlag flag = ReportFlag::cold;
    std::uint64_t seq = 0;

    bool operator==(const KeyReport&) const = default;
};

/// Immutable copy of the counter array taken every `sampling_interval` updates.
struct Snapshot {
    std::uint16_t depth = 0;
    std::uint32_t width = 0;
    std::uint64_t seq = 0;
    std::uint64_t insert_count = 0;
    std::uint64_t scale = 0;
    std::vector<std::uint32_t> counters;

    bool operator==(const Snapshot&) const = default;

    /// min over rows of the row maximum (absolute values in count-sketch mode).
    static std::uint64_t compute_scale(std::span<const std::uint32_t> counters, std::uint32_t depth,
                                       std::uint32_t width, SensingMode mode = SensingMode::count_min);
};

/// Heavy filter + counter array + Bloom filter with the vote-based update.
/// Single writer; not thread-safe.
class DataPlane {
public:
    DataPlane(const SketchConfig& cfg, std::uint64_t master_seed);

    /// Inserts one item. Returns the key report the update produced, if any
    /// (an update produces at most one).
    std::optional<KeyReport> update(const StreamItem& item);

    Count hf_query(const Key& key) const { return filter_.query(key); }
    void sketch_insert(const Key& key, Count value);
    bool bf_contains(const Key& key) const { return bloom_.contains(key); }
    void bf_insert(const Key& key) { bloom_.insert(key); }

    /// Call after each update; yields a snapshot iff insert_count is a
    /// positive multiple of the sampling interval.
    std::optional<Snapshot> maybe_snapshot();
    /// Unconditional copy of the current counters.
    Snapshot snapshot() const;

    std::uint64_t insert_count() const { return insert_count_; }
    std::uint64_t snapshot_count() const { return snapshot_seq_; }
    /// Total volume flushed into the counter array.
    std::uint64_t sketch_volume() const { return sketch_volume_; }
    /// Cumulative hash-function invocations, and those of the last update.
    std::uint64_t hash_invocations() const { return hash_calls_; }
    std::uint64_t last_update_hash_invocations() const { return last_update_hashes_; }

    const SketchConfig& config() const { return cfg_; }
    const SketchHasher& hasher() const { return counters_.hasher(); }
    const HeavyFilter& heavy_filter() const { return filter_; }
    HeavyFilter& heavy_filter() { return filter_; }
    const CmCounters& counters() const { return counters_; }
    const BloomFilter& bloom() const { return bloom_; }

private:
    KeyReport make_report(const Key& key, ReportFlag flag) { return KeyReport{key, flag, ++report_seq_}; }
    bool should_evict(std::uint32_t new_count, std::uint64_t old_count) const;

    SketchConfig cfg_;
    HeavyFilter filter_;
    CmCounters counters_;
    BloomFilter bloom_;
    std::uint64_t insert_count_ = 0;
    std::uint64_t snapshot_seq_ = 0;
    std::uint64_t last_snapshot_at_ = 0;
    std::uint64_t report_seq_ = 0;
    std::uint64_t sketch_volume_ = 0;
    std::uint64_t hash_calls_ = 0;
    std::uint64_t last_update_hashes_ = 0;
};

} // namespace ucl
