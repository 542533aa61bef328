#include "ucl/key.hpp"

#include <algorithm>

#include "ucl/errors.hpp"
#include "ucl/hash.hpp"

namespace ucl {

Key::Key(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > kMaxLen) {
        throw ConfigError("key longer than " + std::to_string(kMaxLen) + " bytes");
    }
    std::copy(bytes.begin(), bytes.end(), bytes_.begin());
    len_ = static_cast<std::uint8_t>(bytes.size());
}

Key Key::from_u32(std::uint32_t id) {
    const std::array<std::uint8_t, 4> be{
        static_cast<std::uint8_t>(id >> 24), static_cast<std::uint8_t>(id >> 16),
        static_cast<std::uint8_t>(id >> 8), static_cast<std::uint8_t>(id)};
    return Key(be);
}

namespace {
int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace

Key Key::from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0 || hex.empty() || hex.size() / 2 > kMaxLen) {
        throw FormatError("bad hex key '" + std::string(hex) + "'");
    }
    std::array<std::uint8_t, kMaxLen> buf{};
    for (std::size_t i = 0; i < hex.size() / 2; ++i) {
        const int hi = hex_digit(hex[2 * i]);
        const int lo = hex_digit(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw FormatError("bad hex key '" + std::string(hex) + "'");
        buf[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return Key(std::span<const std::uint8_t>(buf.data(), hex.size() / 2));
}

std::string Key::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len_);
    for (std::size_t i = 0; i < len_; ++i) {
        out.push_back(digits[bytes_[i] >> 4]);
        out.push_back(digits[bytes_[i] & 0xF]);
    }
    return out;
}

std::size_t KeyHash::operator()(const Key& k) const noexcept {
    return static_cast<std::size_t>(mix_hash(0x51ed270b27a1d3c5ULL, k.bytes()));
}

} // namespace ucl
