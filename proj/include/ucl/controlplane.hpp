#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ucl/dataplane.hpp"
#include "ucl/solver/model.hpp"
#include "ucl/solver/trainer.hpp"

namespace ucl {

/// Keys in first-report order plus the set of positions ever reported hot.
/// Positions never change once assigned.
class KeyRegistry {
public:
    void handle_report(const KeyReport& report);

    std::optional<std::size_t> position(const Key& key) const;
    std::size_t size() const { return keys_.size(); }
    std::span<const Key> keys() const { return keys_; }
    bool is_hot(std::size_t pos) const { return hot_[pos] != 0; }
    /// Hot positions in ascending order.
    std::vector<std::size_t> hot_positions() const;
    std::size_t hot_count() const { return hot_count_; }
    /// Bumped on every change (new key or flag upgrade).
    std::uint64_t version() const { return version_; }

private:
    std::vector<Key> keys_;
    std::vector<std::uint8_t> hot_;
    std::unordered_map<Key, std::size_t, KeyHash> index_;
    std::size_t hot_count_ = 0;
    std::uint64_t version_ = 0;
};

/// Immutable view for answering queries: one model version, one snapshot,
/// one registry version and the heavy filter as of the snapshot.
class QueryContext {
public:
    QueryContext(std::shared_ptr<const solver::SolverModel> model, std::optional<Snapshot> snap,
                 std::shared_ptr<const KeyRegistry> registry, HeavyFilter filter,
                 SensingMode mode = SensingMode::count_min);

    /// Learned sketch part (registry keys only) plus the heavy-filter count.
    Count query(const Key& key) const;

    /// Learned sketch-part estimate of every registry position.
    std::span<const Count> sketch_estimates() const { return estimates_; }
    const KeyRegistry& registry() const { return *registry_; }
    const std::optional<Snapshot>& snapshot() const { return snap_; }
    std::uint32_t bucket_len() const { return model_->shape().bucket_len; }

private:
    std::shared_ptr<const solver::SolverModel> model_;
    std::optional<Snapshot> snap_;
    std::shared_ptr<const KeyRegistry> registry_;
    HeavyFilter filter_;
    std::vector<Count> estimates_;
};

/// (bucket id, offset within the bucket) of a registry position.
inline std::pair<std::size_t, std::size_t> bucket_of(std::size_t pos, std::uint32_t bucket_len) {
    return {pos / bucket_len, pos % bucket_len};
}

/// Report intake, snapshot window and model publication shared by the
/// ingestion thread, the trainer and queriers. All methods lock.
class ControlPlane {
public:
    ControlPlane(std::size_t window_len, std::shared_ptr<const solver::SolverModel> initial);

    void on_report(const KeyReport& report);
    void on_snapshot(Snapshot snap);
    void publish(std::shared_ptr<const solver::SolverModel> model);

    struct TrainingView {
        std::shared_ptr<const KeyRegistry> registry;
        solver::SlidingWindow window;
    };
    /// Consistent copy of the registry and window for one epoch.
    TrainingView training_view() const;

    std::shared_ptr<const KeyRegistry> registry() const;
    std::shared_ptr<const solver::SolverModel> model() const;
    std::optional<Snapshot> latest_snapshot() const;
    std::size_t window_size() const;

    /// Captures registry, latest snapshot and latest model atomically. The
    /// heavy filter must be the one the latest snapshot was taken from.
    QueryContext freeze_epoch(const HeavyFilter& filter, SensingMode mode = SensingMode::count_min) const;

private:
    std::shared_ptr<const KeyRegistry> registry_locked() const;

    mutable std::mutex mu_;
    KeyRegistry registry_;
    mutable std::shared_ptr<const KeyRegistry> registry_copy_;
    solver::SlidingWindow window_;
    std::shared_ptr<const solver::SolverModel> model_;
};

} // namespace ucl
