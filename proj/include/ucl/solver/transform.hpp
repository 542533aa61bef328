#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ucl/config.hpp"
#include "ucl/dataplane.hpp"
#include "ucl/key.hpp"
#include "ucl/solver/model.hpp"

namespace ucl::solver {

/// One random Zipf-preserving transform: a budget c spread over the hot
/// keys in proportion to their current volume, plus a `unit` bump on a
/// random cold_fraction of the remaining keys.
struct TransformSpec {
    Count c = 1000;
    std::vector<std::size_t> hot_indices;
    double cold_fraction = 0.05;
    Count unit = 1;
    std::uint64_t seed = 0;
};

/// Splits `total` into integer shares proportional to `weights` by largest
/// remainder; ties go to the lower index. All-zero weights split uniformly.
std::vector<Count> allocate_proportional(std::span<const double> weights, Count total);

/// Number of cold keys a transform bumps.
std::size_t cold_bump_count(double cold_fraction, std::size_t non_hot);

struct TransformResult {
    std::vector<double> x_prime;
    /// x_prime - x, in the normalized domain.
    std::vector<double> delta;
    /// Same increments in count units.
    std::vector<Count> increments;
};

/// x is in the normalized domain; increments are computed in count units and
/// divided by `scale`. Throws std::out_of_range for a bad hot index and
/// std::invalid_argument for duplicates or a non-positive scale.
TransformResult apply_transform(std::span<const double> x, const TransformSpec& spec, double scale);

/// diag((x + delta) / x): the explicit matrix of one sampled transform, for
/// rank diagnostics. Every x_i must be nonzero.
Eigen::MatrixXd transform_matrix(std::span<const double> x, std::span<const double> delta);

struct Normalized {
    std::vector<double> y;
    double scale = 0;
};

/// y / scale with scale = min over rows of the row maximum. nullopt when the
/// counters carry no signal (scale 0).
std::optional<Normalized> normalize(const Snapshot& snap, SensingMode mode = SensingMode::count_min);

/// Real-valued estimates in the normalized domain for registry positions [0, n).
std::vector<double> recover_normalized(const SolverModel& model, std::span<const double> y_norm, std::size_t n);

/// Estimates in count units: round(scale * output), never negative. All zero
/// when the snapshot is empty.
std::vector<Count> recover_full(const SolverModel& model, const Snapshot& snap, std::size_t n,
                                SensingMode mode = SensingMode::count_min);

} // namespace ucl::solver
