#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ucl/dataplane.hpp"
#include "ucl/sensing.hpp"

namespace ucl {

struct RecoveryResult {
    std::vector<double> x_hat;
    std::size_t iterations = 0;
    /// ||A x_hat - y||_2, recomputed from x_hat after any clamping.
    double residual_l2 = 0;
    bool converged = false;
};

struct LsqrOptions {
    std::size_t max_iters = 1000;
    /// Stop when ||r|| <= atol * ||y|| or ||A^T r|| <= atol * ||A|| * ||r||.
    double atol = 1e-12;
    bool nonnegative = false;
};

/// Paige-Saunders LSQR started at x = 0, so consistent underdetermined
/// systems converge to the minimum-norm solution.
RecoveryResult lsqr(const LinearOperator& a, std::span<const double> y, const LsqrOptions& opts = {});

struct OmpOptions {
    /// 0 selects the default: columns with nonzero correlation to y, capped at rows().
    std::size_t max_sparsity = 0;
    /// Absolute residual norm at which selection stops.
    double residual_tol = 1e-10;
    bool nonnegative = true;
};

struct OmpResult : RecoveryResult {
    std::vector<std::size_t> support;
    /// ||r_t|| after each selection, starting with ||y||.
    std::vector<double> residual_history;
};

/// Orthogonal matching pursuit with an incrementally maintained orthonormal
/// basis of the selected columns. Columns linearly dependent on the current
/// support are skipped.
OmpResult omp(const LinearOperator& a, std::span<const double> y, const OmpOptions& opts = {});

/// Minimum over rows of the key's counters.
Count cm_point_query(std::span<const std::uint32_t> counters, const SketchHasher& hasher, const Key& key);
inline Count cm_point_query(const CmCounters& c, const Key& key) { return cm_point_query(c.raw(), c.hasher(), key); }

/// Median over rows of sign * counter (two's-complement counters). Even depth
/// takes the mean of the middle pair, truncated toward zero.
std::int64_t cs_point_query(std::span<const std::uint32_t> counters, const SketchHasher& hasher, const Key& key);
inline std::int64_t cs_point_query(const CmCounters& c, const Key& key) {
    return cs_point_query(c.raw(), c.hasher(), key);
}

/// Median with the even-count convention above.
std::int64_t median_toward_zero(std::vector<std::int64_t> values);

} // namespace ucl
