#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace ucl {

using Count = std::uint64_t;

/// Fixed-width stream key. Unused trailing bytes are always zero so that
/// equality and hashing are plain bytewise operations.
class Key {
public:
    static constexpr std::size_t kMaxLen = 16;

    Key() = default;
    explicit Key(std::span<const std::uint8_t> bytes);

    /// 4-byte big-endian encoding of an integer id.
    static Key from_u32(std::uint32_t id);
    /// Parses an even-length hex string; throws FormatError on bad input.
    static Key from_hex(std::string_view hex);

    std::string to_hex() const;

    std::span<const std::uint8_t> bytes() const { return {bytes_.data(), len_}; }
    std::size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool operator==(const Key&) const = default;
    auto operator<=>(const Key&) const = default;

private:
    std::array<std::uint8_t, kMaxLen> bytes_{};
    std::uint8_t len_ = 0;
};

struct StreamItem {
    Key key;
    Count value = 1;
};

struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
};

} // namespace ucl

template<>
struct std::hash<ucl::Key> {
    std::size_t operator()(const ucl::Key& k) const noexcept { return ucl::KeyHash{}(k); }
};
