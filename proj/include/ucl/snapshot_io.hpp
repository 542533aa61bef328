#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>

#include "ucl/dataplane.hpp"

namespace ucl {

// Snapshot layout (little-endian): "UCLS", u16 version, u16 depth, u32 width,
// u64 seq, u64 insert_count, u64 scale, then depth*width u32 counters.
inline constexpr std::uint16_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot load_snapshot(const std::filesystem::path& path);

// Key report record: u8 key length, key bytes, u8 flag, u64 seq.
void write_report(std::ostream& out, const KeyReport& report);
/// nullopt at clean end of stream; FormatError on a partial record.
std::optional<KeyReport> read_report(std::istream& in);

// Heavy filter state: "UCLH", u16 version, u32 slots, then per slot
// u8 occupied, u8 key length, key bytes, u32 new_count, u32 old_count.
void write_heavy_filter(std::ostream& out, const HeavyFilter& filter);
/// Overwrites the slots of `filter`; slot counts must match.
void read_heavy_filter(std::istream& in, HeavyFilter& filter);

} // namespace ucl
