#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "ucl/solver/model.hpp"

namespace ucl::solver {

// Checkpoint layout (little-endian): "UCLM", u16 version, u32 depth, u32 width,
// u32 hidden, u32 bucket_len, u8 shared, u32 num_buckets, u64 seed,
// u64 parameter count, then every parameter as f32 in parameters() order.
inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const SolverModel& model);
SolverModel read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const SolverModel& model);
SolverModel load_checkpoint(const std::filesystem::path& path);

} // namespace ucl::solver
