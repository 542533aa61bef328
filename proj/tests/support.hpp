#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ucl/key.hpp"

namespace ucl::test {

inline Key random_key(std::mt19937_64& rng, std::size_t len = 4) {
    std::vector<std::uint8_t> b(len);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return Key(b);
}

/// Upper-tail p-value of Pearson's statistic against equal expected counts.
inline double chi_square_uniform_p(std::span<const std::size_t> counts) {
    double total = 0;
    for (auto c : counts) total += static_cast<double>(c);
    const double expected = total / static_cast<double>(counts.size());
    double stat = 0;
    for (auto c : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Exact per-key volume of a stream.
inline std::vector<StreamItem> random_stream(std::mt19937_64& rng, std::size_t items, std::uint32_t universe,
                                             Count max_value = 1) {
    std::vector<StreamItem> out(items);
    for (auto& it : out) {
        it.key = Key::from_u32(static_cast<std::uint32_t>(rng() % universe));
        it.value = 1 + rng() % max_value;
    }
    return out;
}

} // namespace ucl::test
