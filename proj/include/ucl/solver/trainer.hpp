#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "ucl/config.hpp"
#include "ucl/dataplane.hpp"
#include "ucl/nn/adam.hpp"
#include "ucl/sensing.hpp"
#include "ucl/solver/model.hpp"
#include "ucl/solver/transform.hpp"

namespace ucl::solver {

/// The most recent `capacity` snapshots; the eldest goes first.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity);

    void push(Snapshot snap);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }
    const Snapshot& operator[](std::size_t i) const { return items_[i]; }
    const Snapshot& back() const { return items_.back(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::size_t capacity_;
    std::deque<Snapshot> items_;
};

struct LossParts {
    double measurement = 0;
    double equiv = 0;
    double sparse = 0;
    double total = 0;
};

struct EpochLoss {
    std::uint32_t epoch = 0;
    LossParts loss;
};

struct TrainReport {
    std::vector<EpochLoss> epochs;
    std::uint32_t best_epoch = 0;
    double best_loss = 0;
    bool early_stopped = false;
};

/// epoch,loss_measurement,[loss_equiv,]loss_sparse,total
void write_train_csv(std::ostream& out, const TrainReport& report, bool equivariance);

/// Returns the fixed increment vector (normalized domain) of sample `s`,
/// given that sample's first-pass estimate x.
using DeltaFn = std::function<std::vector<double>(std::span<const double> x, std::size_t s)>;

/// Batch mean of  ||A x - y||^2 + ||D(A x') - x'||^2 + lambda * ||x||_1  with
/// x = D(y) over registry positions [0, a.cols()) and x' = x + delta(x), delta
/// held constant. With `want_grad`, parameter gradients are accumulated into
/// the model (callers zero them first).
LossParts composite_loss(SolverModel& model, const LinearOperator& a, const Tensor& y, double lambda,
                         bool equivariance, const DeltaFn& delta, bool want_grad);

/// Adam over shuffled mini-batches of normalized snapshots.
class Trainer {
public:
    Trainer(SolverModel& model, const TrainConfig& cfg, std::uint32_t sampling_interval, std::uint64_t seed,
            SensingMode mode = SensingMode::count_min);

    /// One pass over `window`. Throws DivergenceError on a non-finite loss.
    EpochLoss run_epoch(const SlidingWindow& window, const LinearOperator& a, std::span<const std::size_t> hot);

    /// Up to cfg.epochs epochs with early stopping on `patience`; the best
    /// parameters are restored at the end. `on_epoch` runs after every epoch.
    TrainReport train(const SlidingWindow& window, const LinearOperator& a, std::span<const std::size_t> hot,
                      const std::function<void(const EpochLoss&)>& on_epoch = {});

    std::uint32_t epochs_run() const { return epoch_; }

private:
    /// First-epoch head bias: the logit of the window's mean per-key mass.
    void calibrate_output(const std::vector<Normalized>& samples, const LinearOperator& a);

    SolverModel& model_;
    TrainConfig cfg_;
    Count hot_increment_;
    SensingMode mode_;
    std::mt19937_64 rng_;
    nn::AdamState adam_;
    std::uint32_t epoch_ = 0;
};

} // namespace ucl::solver
