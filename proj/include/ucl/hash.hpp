#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ucl/key.hpp"

namespace ucl {

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded, non-cryptographic 64-bit hash over a byte string.
std::uint64_t mix_hash(std::uint64_t seed, std::span<const std::uint8_t> bytes) noexcept;

/// Independent seed namespaces derived from one master seed.
enum class SeedSpace : std::uint64_t {
    heavy_filter = 1,
    sketch_row = 2,
    bloom = 3,
    sign = 4,
    model_init = 5,
    training = 6,
};

std::uint64_t derive_seed(std::uint64_t master, SeedSpace space, std::uint64_t index) noexcept;

/// A list of seeded hash functions sharing one mixing algorithm.
class HashFamily {
public:
    static constexpr std::string_view kAlgorithm = "mix64-v1";

    HashFamily() = default;
    explicit HashFamily(std::vector<std::uint64_t> seeds) : seeds_(std::move(seeds)) {}

    /// `count` seeds from namespace `space` of `master`.
    static HashFamily derive(std::uint64_t master, SeedSpace space, std::size_t count);

    /// Raw 64-bit output of function `index`. Throws ConfigError if out of bounds.
    std::uint64_t hash(std::size_t index, const Key& key) const;
    /// Output reduced into [0, range); range must be >= 1.
    std::uint64_t hash(std::size_t index, const Key& key, std::uint64_t range) const;

    std::size_t size() const { return seeds_.size(); }
    std::span<const std::uint64_t> seeds() const { return seeds_; }
    std::string_view algorithm() const { return kAlgorithm; }

private:
    std::vector<std::uint64_t> seeds_;
};

} // namespace ucl
