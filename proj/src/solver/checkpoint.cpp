#include "ucl/solver/checkpoint.hpp"

#include <fstream>

#include "ucl/detail/binary.hpp"
#include "ucl/errors.hpp"

namespace ucl::solver {

using detail::get_le;
using detail::put_le;

void write_checkpoint(std::ostream& out, const SolverModel& model) {
    const auto& s = model.shape();
    out.write("UCLM", 4);
    put_le<std::uint16_t>(out, kCheckpointVersion);
    put_le<std::uint32_t>(out, s.depth);
    put_le<std::uint32_t>(out, s.width);
    put_le<std::uint32_t>(out, s.hidden);
    put_le<std::uint32_t>(out, s.bucket_len);
    put_le<std::uint8_t>(out, s.shared ? 1 : 0);
    put_le<std::uint32_t>(out, s.num_buckets);
    put_le<std::uint64_t>(out, model.seed());
    put_le<std::uint64_t>(out, model.parameter_count());
    for (const auto* p : model.parameters()) {
        const double* v = p->value.data();
        for (Eigen::Index i = 0; i < p->value.size(); ++i) detail::put_f32(out, static_cast<float>(v[i]));
    }
}

SolverModel read_checkpoint(std::istream& in) {
    detail::expect_magic(in, "UCLM", "checkpoint");
    const auto version = get_le<std::uint16_t>(in, "checkpoint version");
    if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
    ModelShape s;
    s.depth = get_le<std::uint32_t>(in, "checkpoint depth");
    s.width = get_le<std::uint32_t>(in, "checkpoint width");
    s.hidden = get_le<std::uint32_t>(in, "checkpoint hidden");
    s.bucket_len = get_le<std::uint32_t>(in, "checkpoint bucket_len");
    const auto shared = get_le<std::uint8_t>(in, "checkpoint shared flag");
    if (shared > 1) throw FormatError("bad checkpoint shared flag");
    s.shared = shared == 1;
    s.num_buckets = get_le<std::uint32_t>(in, "checkpoint num_buckets");
    const auto seed = get_le<std::uint64_t>(in, "checkpoint seed");
    const auto count = get_le<std::uint64_t>(in, "checkpoint parameter count");
    if (s.depth == 0 || s.width == 0 || s.hidden == 0 || s.bucket_len == 0 || s.depth > 1024 || s.width > (1u << 24) ||
        s.hidden > 8192 || s.bucket_len > (1u << 20) || s.num_buckets > (1u << 20)) {
        throw FormatError("implausible checkpoint dimensions");
    }
    if (count != SolverModel::parameter_count(s)) throw FormatError("checkpoint parameter count does not match shape");

    SolverModel model = [&] {
        try {
            return SolverModel(s, seed);
        } catch (const ConfigError& e) {
            throw FormatError(std::string("bad checkpoint shape: ") + e.what());
        }
    }();
    for (auto* p : model.parameters()) {
        double* v = p->value.data();
        for (Eigen::Index i = 0; i < p->value.size(); ++i) v[i] = detail::get_f32(in, "checkpoint parameters");
    }
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const SolverModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    write_checkpoint(out, model);
}

SolverModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    return read_checkpoint(in);
}

} // namespace ucl::solver
