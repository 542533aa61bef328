#include "ucl/hash.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "ucl/errors.hpp"

namespace ucl {

std::uint64_t mix_hash(std::uint64_t seed, std::span<const std::uint8_t> bytes) noexcept {
    constexpr std::uint64_t k1 = 0x87c37b91114253d5ULL;
    constexpr std::uint64_t k2 = 0x4cf5ad432745937fULL;

    std::uint64_t h = seed ^ (bytes.size() * 0x9e3779b97f4a7c15ULL);
    std::size_t i = 0;
    for (; i + 8 <= bytes.size(); i += 8) {
        std::uint64_t chunk = 0;
        for (std::size_t b = 0; b < 8; ++b) chunk |= std::uint64_t{bytes[i + b]} << (8 * b);
        h ^= std::rotl(chunk * k1, 31) * k2;
        h = std::rotl(h, 27) * 5 + 0x52dce729;
    }
    if (i < bytes.size()) {
        std::uint64_t tail = 0;
        for (std::size_t b = 0; i + b < bytes.size(); ++b) tail |= std::uint64_t{bytes[i + b]} << (8 * b);
        h ^= std::rotl(tail * k1, 31) * k2;
    }
    return splitmix64(h);
}

std::uint64_t derive_seed(std::uint64_t master, SeedSpace space, std::uint64_t index) noexcept {
    const std::uint64_t tag = (static_cast<std::uint64_t>(space) << 48) ^ index;
    return splitmix64(master ^ splitmix64(tag));
}

HashFamily HashFamily::derive(std::uint64_t master, SeedSpace space, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_seed(master, space, i);
    return HashFamily(std::move(seeds));
}

std::uint64_t HashFamily::hash(std::size_t index, const Key& key) const {
    if (index >= seeds_.size()) {
        throw ConfigError("hash index " + std::to_string(index) + " out of bounds (family has " +
                          std::to_string(seeds_.size()) + " seeds)");
    }
    return mix_hash(seeds_[index], key.bytes());
}

std::uint64_t HashFamily::hash(std::size_t index, const Key& key, std::uint64_t range) const {
    if (range == 0) throw ConfigError("hash range must be >= 1");
    return hash(index, key) % range;
}

} // namespace ucl
