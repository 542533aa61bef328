#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ucl/dataplane.hpp"
#include "ucl/key.hpp"

namespace ucl {

/// Matrix-free linear map R^cols -> R^rows with an adjoint.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    /// y = A x. Throws std::invalid_argument on length mismatch.
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    /// x = A^T y.
    virtual void apply_transpose(std::span<const double> y, std::span<double> x) const = 0;
    /// Writes column `j` (length rows()) into `out`.
    virtual void column(std::size_t j, std::span<double> out) const;

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> apply_transpose(std::span<const double> y) const;
};

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {}

    std::size_t rows() const override { return static_cast<std::size_t>(m_.rows()); }
    std::size_t cols() const override { return static_cast<std::size_t>(m_.cols()); }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_transpose(std::span<const double> y, std::span<double> x) const override;
    void column(std::size_t j, std::span<double> out) const override;
    using LinearOperator::apply;
    using LinearOperator::apply_transpose;

    const Eigen::MatrixXd& matrix() const { return m_; }

private:
    Eigen::MatrixXd m_;
};

/// The implicit 0/1 (or +-1) sensing matrix of a sketch over an ordered key
/// list: column i has one nonzero per row block, at j*w + H_j(key_i).
/// Valid for the key list (registry version) it was built from.
class SketchOperator final : public LinearOperator {
public:
    SketchOperator(const SketchHasher& hasher, std::span<const Key> keys);

    std::size_t rows() const override { return std::size_t{depth_} * width_; }
    std::size_t cols() const override { return n_; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void apply_transpose(std::span<const double> y, std::span<double> x) const override;
    void column(std::size_t j, std::span<double> out) const override;
    using LinearOperator::apply;
    using LinearOperator::apply_transpose;

    /// Integer sensing, used to check the stream/operator identity exactly.
    std::vector<std::int64_t> apply_exact(std::span<const std::int64_t> x) const;

    /// Flattened counter index of key `col` in row `row`.
    std::uint32_t position(std::size_t col, std::size_t row) const { return positions_[col * depth_ + row]; }
    int sign(std::size_t col, std::size_t row) const { return signs_.empty() ? 1 : signs_[col * depth_ + row]; }
    std::span<const std::uint32_t> positions_of(std::size_t col) const {
        return {positions_.data() + col * depth_, depth_};
    }

    std::uint32_t depth() const { return depth_; }
    std::uint32_t width() const { return width_; }
    SensingMode mode() const { return mode_; }
    /// Registry size the operator was built for.
    std::size_t version() const { return n_; }

    /// Dense copy for diagnostics; throws std::length_error past the guards.
    Eigen::MatrixXd materialize(std::size_t max_n = 2000, std::size_t max_m = 2000) const;
    void write_csv(std::ostream& out, std::size_t max_n = 2000, std::size_t max_m = 2000) const;

private:
    std::uint32_t depth_;
    std::uint32_t width_;
    SensingMode mode_;
    std::size_t n_;
    std::vector<std::uint32_t> positions_;
    std::vector<std::int8_t> signs_;
};

struct RankReport {
    std::size_t rank = 0;
    std::size_t columns = 0;
    bool full_rank = false;
};

/// Numerical rank by Gaussian elimination with full pivoting; pivots below
/// rel_tol * ||M||_F are treated as zero.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-9);

/// Rank of B = [A; A T_1; ...; A T_p] for explicit n x n transforms.
/// Throws std::length_error if B exceeds max_entries.
RankReport rank_diagnostic(const Eigen::MatrixXd& a, const std::vector<Eigen::MatrixXd>& transforms,
                           std::size_t max_entries = 4'000'000);

/// Gaussian prior of one key's frequency plus the norms of the (unknown)
/// frequency vector, supplied by the caller.
struct MapPrior {
    double mu = 0;
    double sigma2 = 0;
    double l1 = 0;
    double l2sq = 0;
};

/// Closed-form posterior estimate of one key's frequency from the d counters
/// it hashes to (`positions` are flattened indices into `y`).
double map_estimate(std::span<const std::uint32_t> positions, std::span<const double> y, const MapPrior& prior,
                    std::uint32_t depth, std::uint32_t width);

} // namespace ucl
