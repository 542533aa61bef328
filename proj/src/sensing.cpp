#include "ucl/sensing.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ucl/errors.hpp"

namespace ucl {

namespace {
void check_len(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) + ", expected " +
                                    std::to_string(want));
    }
}
} // namespace

void LinearOperator::column(std::size_t j, std::span<double> out) const {
    std::vector<double> e(cols(), 0.0);
    e.at(j) = 1.0;
    apply(e, out);
}

std::vector<double> LinearOperator::apply(std::span<const double> x) const {
    std::vector<double> y(rows());
    apply(x, y);
    return y;
}

std::vector<double> LinearOperator::apply_transpose(std::span<const double> y) const {
    std::vector<double> x(cols());
    apply_transpose(y, x);
    return x;
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
    check_len(x.size(), cols(), "apply input");
    check_len(y.size(), rows(), "apply output");
    Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) = m_ * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

void DenseOperator::apply_transpose(std::span<const double> y, std::span<double> x) const {
    check_len(y.size(), rows(), "apply_transpose input");
    check_len(x.size(), cols(), "apply_transpose output");
    Eigen::Map<Eigen::VectorXd>(x.data(), x.size()) =
        m_.transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
}

void DenseOperator::column(std::size_t j, std::span<double> out) const {
    check_len(out.size(), rows(), "column output");
    Eigen::Map<Eigen::VectorXd>(out.data(), out.size()) = m_.col(static_cast<Eigen::Index>(j));
}

SketchOperator::SketchOperator(const SketchHasher& hasher, std::span<const Key> keys)
    : depth_(hasher.depth()), width_(hasher.width()), mode_(hasher.mode()), n_(keys.size()) {
    positions_.resize(n_ * depth_);
    if (mode_ == SensingMode::count_sketch) signs_.resize(n_ * depth_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::uint32_t j = 0; j < depth_; ++j) {
            positions_[i * depth_ + j] = j * width_ + hasher.column(j, keys[i]);
            if (!signs_.empty()) signs_[i * depth_ + j] = static_cast<std::int8_t>(hasher.sign(j, keys[i]));
        }
    }
}

void SketchOperator::apply(std::span<const double> x, std::span<double> y) const {
    check_len(x.size(), cols(), "apply input");
    check_len(y.size(), rows(), "apply output");
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const auto* pos = positions_.data() + i * depth_;
        if (signs_.empty()) {
            for (std::uint32_t j = 0; j < depth_; ++j) y[pos[j]] += xi;
        } else {
            const auto* sg = signs_.data() + i * depth_;
            for (std::uint32_t j = 0; j < depth_; ++j) y[pos[j]] += sg[j] * xi;
        }
    }
}

void SketchOperator::apply_transpose(std::span<const double> y, std::span<double> x) const {
    check_len(y.size(), rows(), "apply_transpose input");
    check_len(x.size(), cols(), "apply_transpose output");
    for (std::size_t i = 0; i < n_; ++i) {
        const auto* pos = positions_.data() + i * depth_;
        double acc = 0.0;
        if (signs_.empty()) {
            for (std::uint32_t j = 0; j < depth_; ++j) acc += y[pos[j]];
        } else {
            const auto* sg = signs_.data() + i * depth_;
            for (std::uint32_t j = 0; j < depth_; ++j) acc += sg[j] * y[pos[j]];
        }
        x[i] = acc;
    }
}

void SketchOperator::column(std::size_t j, std::span<double> out) const {
    check_len(out.size(), rows(), "column output");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::uint32_t r = 0; r < depth_; ++r) out[position(j, r)] += sign(j, r);
}

std::vector<std::int64_t> SketchOperator::apply_exact(std::span<const std::int64_t> x) const {
    check_len(x.size(), cols(), "apply_exact input");
    std::vector<std::int64_t> y(rows(), 0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::uint32_t j = 0; j < depth_; ++j) y[position(i, j)] += sign(i, j) * x[i];
    }
    return y;
}

Eigen::MatrixXd SketchOperator::materialize(std::size_t max_n, std::size_t max_m) const {
    if (n_ > max_n || rows() > max_m) {
        throw std::length_error("operator too large to materialize (" + std::to_string(rows()) + " x " +
                                std::to_string(n_) + ")");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::uint32_t j = 0; j < depth_; ++j) {
            m(position(i, j), static_cast<Eigen::Index>(i)) += sign(i, j);
        }
    }
    return m;
}

void SketchOperator::write_csv(std::ostream& out, std::size_t max_n, std::size_t max_m) const {
    const auto m = materialize(max_n, max_m);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << static_cast<int>(m(r, c));
        }
        out << '\n';
    }
}

std::size_t numerical_rank(const Eigen::MatrixXd& input, double rel_tol) {
    Eigen::MatrixXd m = input;
    const double tol = rel_tol * m.norm();
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < std::min(rows, cols); ++k) {
        Eigen::Index pr = 0;
        Eigen::Index pc = 0;
        const double pivot = m.bottomRightCorner(rows - k, cols - k).cwiseAbs().maxCoeff(&pr, &pc);
        if (pivot <= tol) break;
        m.row(k).swap(m.row(k + pr));
        m.col(k).swap(m.col(k + pc));
        for (Eigen::Index r = k + 1; r < rows; ++r) {
            const double f = m(r, k) / m(k, k);
            if (f != 0.0) m.row(r).tail(cols - k) -= f * m.row(k).tail(cols - k);
        }
        ++rank;
    }
    return rank;
}

RankReport rank_diagnostic(const Eigen::MatrixXd& a, const std::vector<Eigen::MatrixXd>& transforms,
                           std::size_t max_entries) {
    const auto n = a.cols();
    const auto m = a.rows();
    const auto stacked_rows = m * static_cast<Eigen::Index>(1 + transforms.size());
    if (static_cast<std::size_t>(stacked_rows) * static_cast<std::size_t>(n) > max_entries) {
        throw std::length_error("stacked rank matrix exceeds the size guard");
    }
    Eigen::MatrixXd b(stacked_rows, n);
    b.topRows(m) = a;
    for (std::size_t p = 0; p < transforms.size(); ++p) {
        if (transforms[p].rows() != n || transforms[p].cols() != n) {
            throw std::invalid_argument("transform matrix must be n x n");
        }
        b.middleRows(m * static_cast<Eigen::Index>(p + 1), m) = a * transforms[p];
    }
    RankReport r;
    r.rank = numerical_rank(b);
    r.columns = static_cast<std::size_t>(n);
    r.full_rank = r.rank == r.columns;
    return r;
}

double map_estimate(std::span<const std::uint32_t> positions, std::span<const double> y, const MapPrior& prior,
                    std::uint32_t depth, std::uint32_t width) {
    if (positions.size() != depth) throw std::invalid_argument("map_estimate: need one position per row");
    if (!(prior.sigma2 >= 0) || !(prior.l2sq > 0)) {
        throw ConfigError("map_estimate: invalid prior (need sigma2 >= 0 and l2sq > 0)");
    }
    double ysum = 0;
    for (auto p : positions) ysum += y[p];
    const double d = depth;
    const double w = width;
    const double denom = prior.l2sq + prior.sigma2 * d * (w - 1);
    if (denom == 0.0) throw ConfigError("map_estimate: invalid prior (zero denominator)");
    return (prior.mu * prior.l2sq + prior.sigma2 * (w * ysum - d * prior.l1)) / denom;
}

} // namespace ucl
