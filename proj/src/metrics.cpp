#include "ucl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ucl/errors.hpp"

namespace ucl {

namespace {

void check_lengths(std::span<const Count> truth, std::span<const double> est) {
    if (truth.size() != est.size()) throw std::invalid_argument("truth and estimate lengths differ");
}

std::pair<Histogram, Histogram> histograms(std::span<const Count> truth, std::span<const double> est) {
    check_lengths(truth, est);
    Histogram real, estimated;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0) continue;
        ++real[truth[i]];
        if (const Count e = round_estimate(est[i]); e > 0) ++estimated[e];
    }
    return {std::move(real), std::move(estimated)};
}

} // namespace

Count round_estimate(double v) {
    if (!(v > 0)) return 0;
    return static_cast<Count>(std::floor(v + 0.5));
}

Histogram histogram(std::span<const Count> values) {
    Histogram h;
    for (auto v : values) {
        if (v > 0) ++h[v];
    }
    return h;
}

double aae(std::span<const Count> truth, std::span<const double> est) {
    check_lengths(truth, est);
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0) continue;
        sum += std::abs(static_cast<double>(truth[i]) - est[i]);
        ++n;
    }
    if (n == 0) throw MetricError("AAE over an empty evaluation set");
    return sum / static_cast<double>(n);
}

double are(std::span<const Count> truth, std::span<const double> est) {
    check_lengths(truth, est);
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0) continue;
        const double f = static_cast<double>(truth[i]);
        sum += std::abs(f - est[i]) / f;
        ++n;
    }
    if (n == 0) throw MetricError("ARE over an empty evaluation set");
    return sum / static_cast<double>(n);
}

double wmrd(const Histogram& real, const Histogram& estimated) {
    if (real.empty() && estimated.empty()) throw MetricError("WMRD of two empty histograms");
    double num = 0, den = 0;
    auto a = real.begin();
    auto b = estimated.begin();
    while (a != real.end() || b != estimated.end()) {
        double nr = 0, ne = 0;
        if (b == estimated.end() || (a != real.end() && a->first < b->first)) {
            nr = static_cast<double>((a++)->second);
        } else if (a == real.end() || b->first < a->first) {
            ne = static_cast<double>((b++)->second);
        } else {
            nr = static_cast<double>((a++)->second);
            ne = static_cast<double>((b++)->second);
        }
        num += std::abs(nr - ne);
        den += (nr + ne) / 2;
    }
    return num / den;
}

double wmrd(std::span<const Count> truth, std::span<const double> est) {
    const auto [real, estimated] = histograms(truth, est);
    return wmrd(real, estimated);
}

double histogram_entropy(const Histogram& h) {
    double total = 0;
    for (const auto& [f, c] : h) total += static_cast<double>(c);
    if (total == 0) return 0;
    double e = 0;
    for (const auto& [f, c] : h) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        e -= static_cast<double>(f) * p * std::log2(p);
    }
    return e;
}

double entropy_abs_err(std::span<const Count> truth, std::span<const double> est) {
    const auto [real, estimated] = histograms(truth, est);
    if (real.empty() && estimated.empty()) throw MetricError("entropy of two empty histograms");
    return std::abs(histogram_entropy(real) - histogram_entropy(estimated));
}

AlignedTables align(const FrequencyTable& truth, const FrequencyTable& est) {
    AlignedTables t;
    t.keys.reserve(truth.size());
    for (const auto& [k, v] : truth) t.keys.push_back(k);
    std::sort(t.keys.begin(), t.keys.end());
    t.truth.reserve(t.keys.size());
    t.est.reserve(t.keys.size());
    for (const auto& k : t.keys) {
        t.truth.push_back(truth.at(k));
        const auto it = est.find(k);
        t.est.push_back(it == est.end() ? 0.0 : static_cast<double>(it->second));
    }
    return t;
}

AccuracyReport evaluate(std::span<const Count> truth, std::span<const double> est) {
    return AccuracyReport{.aae = aae(truth, est),
                          .are = are(truth, est),
                          .wmrd = wmrd(truth, est),
                          .entropy = entropy_abs_err(truth, est)};
}

double throughput(std::uint64_t op_count, double elapsed_seconds) {
    if (!(elapsed_seconds > 0)) throw std::invalid_argument("throughput needs a positive elapsed time");
    return static_cast<double>(op_count) / elapsed_seconds / 1e6;
}

} // namespace ucl
