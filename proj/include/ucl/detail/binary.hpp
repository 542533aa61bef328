#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "ucl/errors.hpp"

namespace ucl::detail {

template<typename T>
    requires std::is_integral_v<T>
void put_le(std::ostream& out, T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    std::array<char, sizeof(T)> buf;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<char>(u & 0xFF);
        if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
    }
    out.write(buf.data(), buf.size());
}

inline void put_f32(std::ostream& out, float value) { put_le(out, std::bit_cast<std::uint32_t>(value)); }

template<typename T>
    requires std::is_integral_v<T>
T get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> buf;
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
        throw FormatError(std::string("truncated input while reading ") + what);
    }
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) {
        if constexpr (sizeof(T) > 1) u = static_cast<U>(u << 8);
        u = static_cast<U>(u | buf[i]);
    }
    return static_cast<T>(u);
}

inline float get_f32(std::istream& in, const char* what) { return std::bit_cast<float>(get_le<std::uint32_t>(in, what)); }

inline void expect_magic(std::istream& in, const char (&magic)[5], const char* what) {
    char got[4];
    in.read(got, 4);
    if (in.gcount() != 4 || std::string(got, 4) != std::string(magic, 4)) {
        throw FormatError(std::string("bad magic in ") + what);
    }
}

} // namespace ucl::detail
