#include "ucl/streamgen.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "ucl/errors.hpp"
#include "ucl/nn/tensor.hpp"

namespace ucl {

ZipfGenerator::ZipfGenerator(const ZipfSpec& spec) : spec_(spec), rng_(spec.seed) {
    if (!(spec.skew >= 0)) throw ConfigError("zipf skew must be >= 0");
    if (spec.universe == 0) throw ConfigError("zipf universe must be >= 1");
    cdf_.resize(spec.universe);
    double acc = 0;
    for (std::uint32_t j = 1; j <= spec.universe; ++j) {
        acc += std::pow(static_cast<double>(j), -spec.skew);
        cdf_[j - 1] = acc;
    }
    for (auto& c : cdf_) c /= acc;
    cdf_.back() = 1.0;

    if (spec.permutation_seed) {
        perm_.resize(spec.universe);
        for (std::uint32_t j = 0; j < spec.universe; ++j) perm_[j] = j + 1;
        std::mt19937_64 prng(*spec.permutation_seed);
        for (std::size_t i = perm_.size(); i > 1; --i) {
            const auto k = static_cast<std::size_t>(nn::uniform01(prng) * static_cast<double>(i));
            std::swap(perm_[i - 1], perm_[std::min(k, i - 1)]);
        }
    }
}

std::uint32_t ZipfGenerator::draw_rank() {
    const double u = nn::uniform01(rng_);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    return static_cast<std::uint32_t>(idx + 1);
}

Key ZipfGenerator::key_of_rank(std::uint32_t rank) const {
    return Key::from_u32(perm_.empty() ? rank : perm_[rank - 1]);
}

double ZipfGenerator::probability(std::uint32_t rank) const {
    if (rank == 0 || rank > cdf_.size()) return 0;
    return rank == 1 ? cdf_[0] : cdf_[rank - 1] - cdf_[rank - 2];
}

StreamItem ZipfGenerator::next() {
    ++emitted_;
    return StreamItem{key_of_rank(draw_rank()), 1};
}

std::vector<StreamItem> generate(const ZipfSpec& spec) {
    ZipfGenerator gen(spec);
    std::vector<StreamItem> out;
    out.reserve(spec.length);
    while (!gen.done()) out.push_back(gen.next());
    return out;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw FormatError("cannot read " + path.string());
    std::string data;
    char buf[1 << 16];
    int got;
    while ((got = gzread(f, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(got));
    int err = Z_OK;
    const char* msg = gzerror(f, &err);
    gzclose(f);
    if (got < 0 || (err != Z_OK && err != Z_STREAM_END)) {
        throw FormatError("cannot decompress " + path.string() + ": " + (msg ? msg : "unknown error"));
    }
    return data;
}

void spill(const std::filesystem::path& path, const std::string& data) {
    const bool gz = path.extension() == ".gz";
    gzFile f = gzopen(path.string().c_str(), gz ? "wb6" : "wbT");
    if (!f) throw FormatError("cannot write " + path.string());
    std::size_t off = 0;
    while (off < data.size()) {
        const auto chunk = static_cast<unsigned>(std::min<std::size_t>(data.size() - off, 1 << 20));
        if (gzwrite(f, data.data() + off, chunk) != static_cast<int>(chunk)) {
            gzclose(f);
            throw FormatError("short write to " + path.string());
        }
        off += chunk;
    }
    if (gzclose(f) != Z_OK) throw FormatError("cannot finish " + path.string());
}

std::vector<StreamItem> parse_csv(const std::string& data, const TraceFormat& fmt) {
    std::vector<StreamItem> items;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        std::string_view line(data.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        auto fail = [&](const std::string& why) -> FormatError {
            return FormatError("line " + std::to_string(line_no) + ": " + why);
        };
        const auto comma = line.find(',');
        const std::string_view hex = line.substr(0, comma);
        StreamItem item;
        try {
            item.key = Key::from_hex(hex);
        } catch (const FormatError& e) {
            throw fail(e.what());
        }
        if (item.key.size() != fmt.key_len) {
            throw fail("key has " + std::to_string(item.key.size()) + " bytes, expected " + std::to_string(fmt.key_len));
        }
        if (fmt.has_values) {
            if (comma == std::string_view::npos) throw fail("missing value");
            const auto v = line.substr(comma + 1);
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), item.value);
            if (ec != std::errc() || p != v.data() + v.size()) throw fail("bad value '" + std::string(v) + "'");
            if (item.value == 0) throw fail("value must be >= 1");
        } else if (comma != std::string_view::npos) {
            throw fail("unexpected value column");
        }
        items.push_back(item);
    }
    return items;
}

std::vector<StreamItem> parse_raw(const std::string& data, const TraceFormat& fmt) {
    const std::size_t rec = fmt.key_len + (fmt.has_values ? 4 : 0);
    if (data.size() % rec != 0) {
        throw FormatError("truncated record " + std::to_string(data.size() / rec + 1) + " (" +
                          std::to_string(data.size() % rec) + " of " + std::to_string(rec) + " bytes)");
    }
    std::vector<StreamItem> items;
    items.reserve(data.size() / rec);
    const auto* p = reinterpret_cast<const std::uint8_t*>(data.data());
    for (std::size_t r = 0; r < data.size() / rec; ++r, p += rec) {
        StreamItem item;
        item.key = Key(std::span<const std::uint8_t>(p, fmt.key_len));
        if (fmt.has_values) {
            std::uint32_t v = 0;
            for (int b = 3; b >= 0; --b) v = (v << 8) | p[fmt.key_len + b];
            if (v == 0) throw FormatError("record " + std::to_string(r + 1) + ": value must be >= 1");
            item.value = v;
        }
        items.push_back(item);
    }
    return items;
}

void check_format(const TraceFormat& fmt) {
    if (fmt.key_len == 0 || fmt.key_len > Key::kMaxLen) {
        throw ConfigError("trace key_len must be in [1, " + std::to_string(Key::kMaxLen) + "]");
    }
}

} // namespace

std::vector<StreamItem> read_trace(const std::filesystem::path& path, const TraceFormat& fmt) {
    check_format(fmt);
    const auto data = slurp(path);
    return fmt.variant == TraceVariant::csv ? parse_csv(data, fmt) : parse_raw(data, fmt);
}

void write_trace(const std::filesystem::path& path, const TraceFormat& fmt, const std::vector<StreamItem>& items) {
    check_format(fmt);
    std::string data;
    for (const auto& item : items) {
        if (item.key.size() != fmt.key_len) throw FormatError("item key length does not match the trace format");
        if (fmt.variant == TraceVariant::csv) {
            data += item.key.to_hex();
            if (fmt.has_values) {
                data += ',';
                data += std::to_string(item.value);
            }
            data += '\n';
        } else {
            const auto b = item.key.bytes();
            data.append(reinterpret_cast<const char*>(b.data()), b.size());
            if (fmt.has_values) {
                if (item.value > 0xFFFFFFFFu) throw FormatError("raw trace values must fit in 32 bits");
                auto v = static_cast<std::uint32_t>(item.value);
                for (int k = 0; k < 4; ++k, v >>= 8) data += static_cast<char>(v & 0xFF);
            }
        }
    }
    spill(path, data);
}

} // namespace ucl
