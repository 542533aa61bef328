#include "ucl/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace ucl {

namespace {

using Vec = Eigen::VectorXd;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;

double residual_norm(const LinearOperator& a, std::span<const double> x, std::span<const double> y) {
    const auto ax = a.apply(x);
    double s = 0;
    for (std::size_t i = 0; i < ax.size(); ++i) s += (ax[i] - y[i]) * (ax[i] - y[i]);
    return std::sqrt(s);
}

void clamp_nonnegative(std::vector<double>& x) {
    for (auto& v : x) v = std::max(v, 0.0);
}

} // namespace

RecoveryResult lsqr(const LinearOperator& a, std::span<const double> y, const LsqrOptions& opts) {
    if (y.size() != a.rows()) throw std::invalid_argument("lsqr: y length does not match operator rows");
    const auto m = static_cast<Eigen::Index>(a.rows());
    const auto n = static_cast<Eigen::Index>(a.cols());

    RecoveryResult out;
    Vec x = Vec::Zero(n);
    Vec u = CVecMap(y.data(), m);
    const double norm_y = u.norm();
    double beta = norm_y;
    Vec v = Vec::Zero(n);
    double alpha = 0;
    if (beta > 0) {
        u /= beta;
        a.apply_transpose(std::span<const double>(u.data(), m), std::span<double>(v.data(), n));
        alpha = v.norm();
    }
    if (alpha > 0) v /= alpha;

    if (alpha * beta == 0) {
        // y = 0 or y orthogonal to the range: x = 0 is the least-squares solution.
        out.x_hat.assign(n, 0.0);
        out.converged = true;
        out.residual_l2 = norm_y;
        return out;
    }

    Vec w = v;
    Vec av(m);
    Vec atu(n);
    double phibar = beta;
    double rhobar = alpha;
    double norm_a_sq = 0;

    for (std::size_t it = 1; it <= opts.max_iters; ++it) {
        a.apply(std::span<const double>(v.data(), n), std::span<double>(av.data(), m));
        u = av - alpha * u;
        beta = u.norm();
        norm_a_sq += alpha * alpha + beta * beta;
        if (beta > 0) {
            u /= beta;
            a.apply_transpose(std::span<const double>(u.data(), m), std::span<double>(atu.data(), n));
            v = atu - beta * v;
            alpha = v.norm();
            if (alpha > 0) v /= alpha;
        }

        const double rho = std::hypot(rhobar, beta);
        const double c = rhobar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rhobar = -c * alpha;
        const double phi = c * phibar;
        phibar = s * phibar;

        x += (phi / rho) * w;
        w = v - (theta / rho) * w;
        out.iterations = it;

        const double norm_r = phibar;
        const double norm_atr = phibar * alpha * std::abs(c);
        if (norm_r <= opts.atol * norm_y || norm_atr <= opts.atol * std::sqrt(norm_a_sq) * norm_r || beta == 0 ||
            alpha == 0) {
            out.converged = true;
            break;
        }
    }

    out.x_hat.assign(x.data(), x.data() + n);
    if (opts.nonnegative) clamp_nonnegative(out.x_hat);
    out.residual_l2 = residual_norm(a, out.x_hat, y);
    return out;
}

OmpResult omp(const LinearOperator& a, std::span<const double> y, const OmpOptions& opts) {
    if (y.size() != a.rows()) throw std::invalid_argument("omp: y length does not match operator rows");
    const auto m = static_cast<Eigen::Index>(a.rows());
    const auto n = static_cast<Eigen::Index>(a.cols());

    OmpResult out;
    Vec r = CVecMap(y.data(), m);
    const Vec yv = r;
    out.residual_history.push_back(r.norm());

    Vec corr(n);
    a.apply_transpose(std::span<const double>(r.data(), m), std::span<double>(corr.data(), n));
    std::size_t limit = opts.max_sparsity;
    if (limit == 0) {
        limit = static_cast<std::size_t>((corr.array() != 0.0).count());
        limit = std::min<std::size_t>(limit, static_cast<std::size_t>(m));
    }
    limit = std::min<std::size_t>(limit, static_cast<std::size_t>(n));

    Eigen::MatrixXd q(m, static_cast<Eigen::Index>(std::min<std::size_t>(limit, static_cast<std::size_t>(m))));
    Eigen::MatrixXd rr = Eigen::MatrixXd::Zero(q.cols(), q.cols());
    std::vector<char> blocked(static_cast<std::size_t>(n), 0);
    Vec col(m);
    Eigen::Index k = 0;

    while (out.support.size() < limit && k < q.cols() && r.norm() > opts.residual_tol) {
        if (k > 0) a.apply_transpose(std::span<const double>(r.data(), m), std::span<double>(corr.data(), n));
        Eigen::Index best = -1;
        double best_abs = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (blocked[j]) continue;
            const double c = std::abs(corr[j]);
            if (c > best_abs) {
                best_abs = c;
                best = j;
            }
        }
        if (best < 0 || best_abs <= std::numeric_limits<double>::min()) break;

        a.column(static_cast<std::size_t>(best), std::span<double>(col.data(), m));
        blocked[best] = 1;
        const double col_norm = col.norm();
        Vec proj = Vec::Zero(k);
        Vec qn = col;
        for (int pass = 0; pass < 2; ++pass) {
            const Vec h = q.leftCols(k).transpose() * qn;
            qn -= q.leftCols(k) * h;
            proj += h;
        }
        const double nq = qn.norm();
        if (nq <= 1e-10 * col_norm) continue; // dependent on the current support

        q.col(k) = qn / nq;
        rr.col(k).head(k) = proj;
        rr(k, k) = nq;
        r -= q.col(k).dot(r) * q.col(k);
        ++k;
        out.support.push_back(static_cast<std::size_t>(best));
        out.residual_history.push_back(r.norm());
    }
    out.iterations = out.support.size();

    out.x_hat.assign(static_cast<std::size_t>(n), 0.0);
    if (k > 0) {
        const Vec z = q.leftCols(k).transpose() * yv;
        const Vec coef = rr.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(z);
        for (Eigen::Index i = 0; i < k; ++i) out.x_hat[out.support[i]] = coef[i];
    }
    if (opts.nonnegative) clamp_nonnegative(out.x_hat);
    out.residual_l2 = residual_norm(a, out.x_hat, y);
    out.converged = out.residual_history.back() <= opts.residual_tol;
    return out;
}

Count cm_point_query(std::span<const std::uint32_t> counters, const SketchHasher& hasher, const Key& key) {
    Count best = std::numeric_limits<Count>::max();
    for (std::size_t j = 0; j < hasher.depth(); ++j) {
        best = std::min<Count>(best, counters[j * hasher.width() + hasher.column(j, key)]);
    }
    return best;
}

std::int64_t median_toward_zero(std::vector<std::int64_t> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const auto mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return (values[mid - 1] + values[mid]) / 2;
}

std::int64_t cs_point_query(std::span<const std::uint32_t> counters, const SketchHasher& hasher, const Key& key) {
    std::vector<std::int64_t> est(hasher.depth());
    for (std::size_t j = 0; j < hasher.depth(); ++j) {
        const auto raw = counters[j * hasher.width() + hasher.column(j, key)];
        est[j] = hasher.sign(j, key) * std::int64_t{static_cast<std::int32_t>(raw)};
    }
    return median_toward_zero(std::move(est));
}

} // namespace ucl
