#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "ucl/key.hpp"

namespace ucl {

struct ZipfSpec {
    double skew = 1.3;
    std::uint32_t universe = 1'000'000;
    std::uint64_t length = 1'000'000;
    std::uint64_t seed = 1;
    /// Shuffles the rank -> key bijection when set.
    std::optional<std::uint64_t> permutation_seed;
};

/// I.i.d. draws by inverse CDF; rank j (1-based) has probability
/// proportional to j^-skew. Keys are 4-byte big-endian ids, values 1.
class ZipfGenerator {
public:
    explicit ZipfGenerator(const ZipfSpec& spec);

    bool done() const { return emitted_ >= spec_.length; }
    StreamItem next();
    /// 1-based rank of a fresh draw (does not count toward length).
    std::uint32_t draw_rank();
    Key key_of_rank(std::uint32_t rank) const;
    /// Probability of rank j.
    double probability(std::uint32_t rank) const;
    /// cdf[j - 1] = P(rank <= j); the last entry is 1.
    const std::vector<double>& cdf() const { return cdf_; }

private:
    ZipfSpec spec_;
    std::vector<double> cdf_;
    std::vector<std::uint32_t> perm_;
    std::mt19937_64 rng_;
    std::uint64_t emitted_ = 0;
};

std::vector<StreamItem> generate(const ZipfSpec& spec);

enum class TraceVariant { csv, raw };

struct TraceFormat {
    TraceVariant variant = TraceVariant::csv;
    std::uint32_t key_len = 4;
    bool has_values = true;
};

// csv: one `hexkey,value` (or `hexkey`) per line. raw: key_len key bytes,
// then a u32 little-endian value when has_values. Gzip input is detected
// transparently; output is gzip-compressed when the path ends in ".gz".
std::vector<StreamItem> read_trace(const std::filesystem::path& path, const TraceFormat& fmt);
void write_trace(const std::filesystem::path& path, const TraceFormat& fmt, const std::vector<StreamItem>& items);

} // namespace ucl
