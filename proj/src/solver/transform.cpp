#include "ucl/solver/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ucl::solver {

std::vector<Count> allocate_proportional(std::span<const double> weights, Count total) {
    std::vector<Count> out(weights.size(), 0);
    if (weights.empty()) return out;
    double sum = 0;
    for (double w : weights) {
        if (!(w >= 0)) throw std::invalid_argument("allocation weights must be non-negative");
        sum += w;
    }
    std::vector<double> quota(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        quota[i] = sum > 0 ? static_cast<double>(total) * weights[i] / sum
                           : static_cast<double>(total) / static_cast<double>(weights.size());
    }

    Count given = 0;
    std::vector<double> rem(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out[i] = static_cast<Count>(std::floor(quota[i]));
        rem[i] = quota[i] - std::floor(quota[i]);
        given += out[i];
    }
    // Floating-point floors can overshoot by a unit on huge totals.
    while (given > total) {
        auto it = std::max_element(out.begin(), out.end());
        --*it;
        --given;
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; given < total; k = (k + 1) % order.size()) {
        ++out[order[k]];
        ++given;
    }
    return out;
}

std::size_t cold_bump_count(double cold_fraction, std::size_t non_hot) {
    if (cold_fraction <= 0 || non_hot == 0) return 0;
    const double k = std::ceil(cold_fraction * static_cast<double>(non_hot) - 1e-9);
    return std::min(non_hot, static_cast<std::size_t>(std::max(0.0, k)));
}

TransformResult apply_transform(std::span<const double> x, const TransformSpec& spec, double scale) {
    if (!(scale > 0)) throw std::invalid_argument("transform scale must be positive");
    const std::size_t n = x.size();
    std::vector<char> is_hot(n, 0);
    for (auto i : spec.hot_indices) {
        if (i >= n) throw std::out_of_range("hot index " + std::to_string(i) + " out of range");
        if (is_hot[i]) throw std::invalid_argument("duplicate hot index " + std::to_string(i));
        is_hot[i] = 1;
    }

    TransformResult r;
    r.increments.assign(n, 0);

    if (!spec.hot_indices.empty() && spec.c > 0) {
        std::vector<double> vol(spec.hot_indices.size());
        for (std::size_t k = 0; k < vol.size(); ++k) vol[k] = std::max(0.0, x[spec.hot_indices[k]]);
        const auto share = allocate_proportional(vol, spec.c);
        for (std::size_t k = 0; k < vol.size(); ++k) r.increments[spec.hot_indices[k]] += share[k];
    }

    std::vector<std::size_t> cold;
    cold.reserve(n - spec.hot_indices.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_hot[i]) cold.push_back(i);
    }
    const std::size_t bumps = cold_bump_count(spec.cold_fraction, cold.size());
    if (bumps > 0 && spec.unit > 0) {
        std::mt19937_64 rng(spec.seed);
        for (std::size_t k = 0; k < bumps; ++k) {
            const auto span = cold.size() - k;
            const auto j = k + static_cast<std::size_t>(nn::uniform01(rng) * static_cast<double>(span));
            std::swap(cold[k], cold[std::min(j, cold.size() - 1)]);
            r.increments[cold[k]] += spec.unit;
        }
    }

    r.x_prime.resize(n);
    r.delta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.delta[i] = static_cast<double>(r.increments[i]) / scale;
        r.x_prime[i] = x[i] + r.delta[i];
    }
    return r;
}

Eigen::MatrixXd transform_matrix(std::span<const double> x, std::span<const double> delta) {
    if (x.size() != delta.size()) throw std::invalid_argument("transform_matrix length mismatch");
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) throw std::invalid_argument("transform_matrix needs nonzero x");
        t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = (x[i] + delta[i]) / x[i];
    }
    return t;
}

std::optional<Normalized> normalize(const Snapshot& snap, SensingMode mode) {
    const auto scale = Snapshot::compute_scale(snap.counters, snap.depth, snap.width, mode);
    if (scale == 0) return std::nullopt;
    Normalized out;
    out.scale = static_cast<double>(scale);
    out.y.resize(snap.counters.size());
    for (std::size_t i = 0; i < snap.counters.size(); ++i) {
        const double v = mode == SensingMode::count_sketch ? static_cast<double>(static_cast<std::int32_t>(snap.counters[i]))
                                                           : static_cast<double>(snap.counters[i]);
        out.y[i] = v / out.scale;
    }
    return out;
}

std::vector<double> recover_normalized(const SolverModel& model, std::span<const double> y_norm, std::size_t n) {
    if (n == 0) return {};
    if (y_norm.size() != model.input_size()) throw std::invalid_argument("measurement length mismatch");
    const std::size_t nb = bucket_count(n, model.shape().bucket_len);
    std::vector<std::size_t> ids(nb);
    std::iota(ids.begin(), ids.end(), 0);
    const Tensor y = Eigen::Map<const Tensor>(y_norm.data(), 1, static_cast<Eigen::Index>(y_norm.size()));
    const Tensor out = model.forward(y, ids);
    return {out.data(), out.data() + n};
}

std::vector<Count> recover_full(const SolverModel& model, const Snapshot& snap, std::size_t n, SensingMode mode) {
    std::vector<Count> est(n, 0);
    const auto norm = normalize(snap, mode);
    if (!norm || n == 0) return est;
    const auto x = recover_normalized(model, norm->y, n);
    for (std::size_t i = 0; i < n; ++i) est[i] = static_cast<Count>(std::max(0.0, std::round(x[i] * norm->scale)));
    return est;
}

} // namespace ucl::solver
