#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "ucl/key.hpp"

namespace ucl {

using FrequencyTable = std::unordered_map<Key, Count, KeyHash>;

/// frequency -> number of keys with that frequency, zero frequencies dropped.
using Histogram = std::map<Count, std::size_t>;

/// Nearest non-negative integer, halves rounded up.
Count round_estimate(double v);

Histogram histogram(std::span<const Count> values);

// truth[i] and est[i] refer to the same key. Keys with truth 0 are outside the
// evaluation set. Throws MetricError when no key has positive truth.
double aae(std::span<const Count> truth, std::span<const double> est);
double are(std::span<const Count> truth, std::span<const double> est);
/// Histograms are built from the truth and from the rounded estimates of the
/// evaluation keys. Result in [0, 2].
double wmrd(std::span<const Count> truth, std::span<const double> est);
double entropy_abs_err(std::span<const Count> truth, std::span<const double> est);

double wmrd(const Histogram& real, const Histogram& estimated);
/// -sum_i i * p_i * log2(p_i), p_i = n(i) / sum n; 0 log 0 = 0.
double histogram_entropy(const Histogram& h);

/// Evaluation vectors over the keys of `truth` (missing estimates read as 0),
/// ordered by key bytes.
struct AlignedTables {
    std::vector<Key> keys;
    std::vector<Count> truth;
    std::vector<double> est;
};
AlignedTables align(const FrequencyTable& truth, const FrequencyTable& est);

struct AccuracyReport {
    double aae = 0;
    double are = 0;
    double wmrd = 0;
    double entropy = 0;
};
AccuracyReport evaluate(std::span<const Count> truth, std::span<const double> est);

/// Millions of operations per second. Throws std::invalid_argument unless elapsed > 0.
double throughput(std::uint64_t op_count, double elapsed_seconds);

} // namespace ucl
