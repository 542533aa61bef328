#include "ucl/dataplane.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <limits>

#include "ucl/errors.hpp"

namespace ucl {

SketchHasher::SketchHasher(std::uint32_t depth, std::uint32_t width, std::uint64_t master_seed, SensingMode mode)
    : depth_(depth),
      width_(width),
      mode_(mode),
      rows_(HashFamily::derive(master_seed, SeedSpace::sketch_row, depth)),
      signs_(HashFamily::derive(master_seed, SeedSpace::sign, depth)) {
    if (depth == 0 || width == 0) throw ConfigError("sketch depth and width must be positive");
}

CmCounters::CmCounters(SketchHasher hasher)
    : hasher_(std::move(hasher)), counts_(std::size_t{hasher_.depth()} * hasher_.width(), 0) {}

void CmCounters::insert(const Key& key, Count value) {
    const auto w = width();
    const auto delta = static_cast<std::uint32_t>(value);
    for (std::size_t j = 0; j < depth(); ++j) {
        auto& cell = counts_[j * w + hasher_.column(j, key)];
        if (hasher_.sign(j, key) > 0) {
            cell += delta;
        } else {
            cell -= delta;
        }
    }
}

std::int64_t CmCounters::value_at(std::size_t row, std::size_t col) const {
    const auto raw = at(row, col);
    if (hasher_.mode() == SensingMode::count_min) return raw;
    return static_cast<std::int32_t>(raw);
}

std::int64_t CmCounters::row_sum(std::size_t row) const {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < width(); ++i) sum += value_at(row, i);
    return sum;
}

BloomFilter::BloomFilter(std::uint32_t bits, HashFamily hashes)
    : bits_(bits), hashes_(std::move(hashes)), words_((bits + 63) / 64, 0) {
    if (bits == 0) throw ConfigError("bloom.bits must be positive");
}

bool BloomFilter::contains(const Key& key) const {
    for (std::size_t i = 0; i < hashes_.size(); ++i) {
        const auto bit = hashes_.hash(i, key, bits_);
        if (!(words_[bit >> 6] >> (bit & 63) & 1)) return false;
    }
    return true;
}

void BloomFilter::insert(const Key& key) { insert_if_absent(key); }

bool BloomFilter::insert_if_absent(const Key& key) {
    bool fresh = false;
    for (std::size_t i = 0; i < hashes_.size(); ++i) {
        const auto bit = hashes_.hash(i, key, bits_);
        auto& word = words_[bit >> 6];
        const std::uint64_t mask = std::uint64_t{1} << (bit & 63);
        if (!(word & mask)) {
            fresh = true;
            word |= mask;
        }
    }
    return fresh;
}

std::size_t BloomFilter::popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
}

HeavyFilter::HeavyFilter(std::uint32_t slots, HashFamily hash) : hash_(std::move(hash)), slots_(slots) {
    if (slots == 0) throw ConfigError("heavy_filter.slots must be positive");
}

Count HeavyFilter::query(const Key& key) const {
    const auto& s = slots_[index_of(key)];
    return (s.key && *s.key == key) ? s.new_count : 0;
}

std::uint64_t Snapshot::compute_scale(std::span<const std::uint32_t> counters, std::uint32_t depth,
                                      std::uint32_t width, SensingMode mode) {
    std::uint64_t scale = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t j = 0; j < depth; ++j) {
        std::uint64_t row_max = 0;
        for (std::size_t i = 0; i < width; ++i) {
            const auto raw = counters[j * width + i];
            const std::uint64_t v = mode == SensingMode::count_min
                                        ? raw
                                        : static_cast<std::uint64_t>(std::abs(std::int64_t{static_cast<std::int32_t>(raw)}));
            row_max = std::max(row_max, v);
        }
        scale = std::min(scale, row_max);
    }
    return depth == 0 ? 0 : scale;
}

DataPlane::DataPlane(const SketchConfig& cfg, std::uint64_t master_seed)
    : cfg_(cfg),
      filter_(cfg.hf_slots, HashFamily::derive(master_seed, SeedSpace::heavy_filter, 1)),
      counters_(SketchHasher(cfg.depth, cfg.width, master_seed, cfg.sensing)),
      bloom_(cfg.bf_bits, HashFamily::derive(master_seed, SeedSpace::bloom, cfg.bf_hashes)) {
    cfg_.validate();
}

bool DataPlane::should_evict(std::uint32_t new_count, std::uint64_t old_count) const {
    const auto diff = static_cast<std::int64_t>(new_count) - static_cast<std::int64_t>(old_count);
    return cfg_.eviction_rule == EvictionRule::prose ? diff <= 0 : diff > 0;
}

void DataPlane::sketch_insert(const Key& key, Count value) {
    counters_.insert(key, value);
    sketch_volume_ += value;
    hash_calls_ += counters_.hasher().hashes_per_insert();
}

std::optional<KeyReport> DataPlane::update(const StreamItem& item) {
    const auto calls_before = hash_calls_;
    ++insert_count_;
    const auto v = static_cast<std::uint32_t>(item.value);

    const auto idx = filter_.index_of(item.key);
    ++hash_calls_;
    auto& slot = filter_.slot(idx);

    std::optional<KeyReport> report;
    if (slot.empty()) {
        slot.key = item.key;
        slot.new_count = v;
        slot.old_count = 0;
    } else if (*slot.key == item.key) {
        slot.new_count += v;
    } else {
        const std::uint64_t old_after = std::uint64_t{slot.old_count} + v;
        if (should_evict(slot.new_count, old_after)) {
            // Flush the resident into the counters and hand its slot to the newcomer.
            const Key resident = *slot.key;
            sketch_insert(resident, slot.new_count);
            bloom_.insert_if_absent(resident);
            hash_calls_ += bloom_.hash_count();
            report = make_report(resident, ReportFlag::hot);
            slot.key = item.key;
            slot.new_count = v;
            slot.old_count = 0;
        } else {
            slot.old_count = static_cast<std::uint32_t>(old_after);
            sketch_insert(item.key, v);
            const bool fresh = bloom_.insert_if_absent(item.key);
            hash_calls_ += bloom_.hash_count();
            if (fresh) report = make_report(item.key, ReportFlag::cold);
        }
    }
    last_update_hashes_ = hash_calls_ - calls_before;
    return report;
}

std::optional<Snapshot> DataPlane::maybe_snapshot() {
    if (insert_count_ == 0 || insert_count_ % cfg_.sampling_interval != 0 || insert_count_ == last_snapshot_at_) {
        return std::nullopt;
    }
    last_snapshot_at_ = insert_count_;
    ++snapshot_seq_;
    auto snap = snapshot();
    snap.seq = snapshot_seq_;
    return snap;
}

Snapshot DataPlane::snapshot() const {
    Snapshot s;
    s.depth = static_cast<std::uint16_t>(cfg_.depth);
    s.width = cfg_.width;
    s.seq = snapshot_seq_;
    s.insert_count = insert_count_;
    s.counters.assign(counters_.raw().begin(), counters_.raw().end());
    s.scale = Snapshot::compute_scale(s.counters, cfg_.depth, cfg_.width, cfg_.sensing);
    return s;
}

} // namespace ucl
