#include "ucl/snapshot_io.hpp"

#include <fstream>

#include "ucl/detail/binary.hpp"
#include "ucl/errors.hpp"

namespace ucl {

using detail::get_le;
using detail::put_le;

void write_snapshot(std::ostream& out, const Snapshot& snap) {
    if (snap.counters.size() != std::size_t{snap.depth} * snap.width) {
        throw FormatError("snapshot counter count does not match depth * width");
    }
    out.write("UCLS", 4);
    put_le<std::uint16_t>(out, kSnapshotVersion);
    put_le<std::uint16_t>(out, snap.depth);
    put_le<std::uint32_t>(out, snap.width);
    put_le<std::uint64_t>(out, snap.seq);
    put_le<std::uint64_t>(out, snap.insert_count);
    put_le<std::uint64_t>(out, snap.scale);
    for (auto c : snap.counters) put_le<std::uint32_t>(out, c);
}

Snapshot read_snapshot(std::istream& in) {
    detail::expect_magic(in, "UCLS", "snapshot");
    const auto version = get_le<std::uint16_t>(in, "snapshot version");
    if (version != kSnapshotVersion) throw FormatError("unsupported snapshot version " + std::to_string(version));
    Snapshot s;
    s.depth = get_le<std::uint16_t>(in, "snapshot depth");
    s.width = get_le<std::uint32_t>(in, "snapshot width");
    s.seq = get_le<std::uint64_t>(in, "snapshot seq");
    s.insert_count = get_le<std::uint64_t>(in, "snapshot insert_count");
    s.scale = get_le<std::uint64_t>(in, "snapshot scale");
    const std::size_t n = std::size_t{s.depth} * s.width;
    s.counters.resize(n);
    for (auto& c : s.counters) c = get_le<std::uint32_t>(in, "snapshot counters");
    return s;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    write_snapshot(out, snap);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    return read_snapshot(in);
}

void write_report(std::ostream& out, const KeyReport& report) {
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(report.key.size()));
    const auto bytes = report.key.bytes();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(report.flag));
    put_le<std::uint64_t>(out, report.seq);
}

std::optional<KeyReport> read_report(std::istream& in) {
    const int first = in.peek();
    if (first == std::char_traits<char>::eof()) return std::nullopt;
    const auto len = get_le<std::uint8_t>(in, "report key length");
    if (len == 0 || len > Key::kMaxLen) throw FormatError("bad report key length " + std::to_string(len));
    std::array<std::uint8_t, Key::kMaxLen> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), len);
    if (in.gcount() != len) throw FormatError("truncated input while reading report key");
    KeyReport r;
    r.key = Key(std::span<const std::uint8_t>(buf.data(), len));
    const auto flag = get_le<std::uint8_t>(in, "report flag");
    if (flag > 1) throw FormatError("bad report flag " + std::to_string(flag));
    r.flag = static_cast<ReportFlag>(flag);
    r.seq = get_le<std::uint64_t>(in, "report seq");
    return r;
}

void write_heavy_filter(std::ostream& out, const HeavyFilter& filter) {
    out.write("UCLH", 4);
    put_le<std::uint16_t>(out, 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(filter.size()));
    for (const auto& s : filter.slots()) {
        put_le<std::uint8_t>(out, s.empty() ? 0 : 1);
        const auto bytes = s.empty() ? std::span<const std::uint8_t>{} : s.key->bytes();
        put_le<std::uint8_t>(out, static_cast<std::uint8_t>(bytes.size()));
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        put_le<std::uint32_t>(out, s.new_count);
        put_le<std::uint32_t>(out, s.old_count);
    }
}

void read_heavy_filter(std::istream& in, HeavyFilter& filter) {
    detail::expect_magic(in, "UCLH", "heavy filter");
    const auto version = get_le<std::uint16_t>(in, "heavy filter version");
    if (version != 1) throw FormatError("unsupported heavy filter version");
    const auto slots = get_le<std::uint32_t>(in, "heavy filter slots");
    if (slots != filter.size()) throw FormatError("heavy filter slot count mismatch");
    for (std::uint32_t i = 0; i < slots; ++i) {
        auto& s = filter.slot(i);
        const bool occupied = get_le<std::uint8_t>(in, "slot flag") != 0;
        const auto len = get_le<std::uint8_t>(in, "slot key length");
        if (len > Key::kMaxLen) throw FormatError("bad slot key length");
        std::array<std::uint8_t, Key::kMaxLen> buf{};
        in.read(reinterpret_cast<char*>(buf.data()), len);
        if (in.gcount() != len) throw FormatError("truncated heavy filter slot");
        s.key = occupied ? std::optional<Key>(Key(std::span<const std::uint8_t>(buf.data(), len))) : std::nullopt;
        s.new_count = get_le<std::uint32_t>(in, "slot new_count");
        s.old_count = get_le<std::uint32_t>(in, "slot old_count");
    }
}

} // namespace ucl
