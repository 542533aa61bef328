#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ucl/alloc.hpp"
#include "ucl/config.hpp"
#include "ucl/controlplane.hpp"
#include "ucl/errors.hpp"
#include "ucl/experiment.hpp"
#include "ucl/hash.hpp"
#include "ucl/metrics.hpp"
#include "ucl/snapshot_io.hpp"
#include "ucl/solver/checkpoint.hpp"
#include "ucl/streamgen.hpp"

namespace fs = std::filesystem;
using namespace ucl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
    std::string config_path;
    std::string preset;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::uint32_t epochs = 0;
};

struct DataArgs {
    std::string zipf = "1.3:1000000";
    std::uint32_t universe = 1'000'000;
    std::string trace;
    std::string format = "csv";
    std::uint32_t key_len = 4;
    bool no_values = false;
};

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed_given) return c.seed;
    if (const char* env = std::getenv("UCL_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used, 0);
            if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(std::string("UCL_SEED is not an integer: ") + env);
        }
    }
    return 1;
}

Config resolve_config(const Common& c) {
    Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
    if (!c.preset.empty()) {
        const Config p = preset(c.preset);
        cfg.name = p.name;
        cfg.sketch.depth = p.sketch.depth;
        cfg.sketch.width = p.sketch.width;
        cfg.sketch.hf_slots = p.sketch.hf_slots;
    }
    if (c.epochs > 0) cfg.training.epochs = c.epochs;
    cfg.validate();
    return cfg;
}

TraceFormat trace_format(const DataArgs& d) {
    TraceFormat f;
    if (d.format == "csv") {
        f.variant = TraceVariant::csv;
    } else if (d.format == "raw") {
        f.variant = TraceVariant::raw;
    } else {
        throw ConfigError("--format must be csv or raw");
    }
    f.key_len = d.key_len;
    f.has_values = !d.no_values;
    return f;
}

ZipfSpec parse_zipf(const DataArgs& d) {
    ZipfSpec z;
    const auto colon = d.zipf.find(':');
    try {
        z.skew = std::stod(d.zipf.substr(0, colon));
        if (colon != std::string::npos) z.length = std::stoull(d.zipf.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("--zipf expects SKEW[:LENGTH], got '" + d.zipf + "'");
    }
    z.universe = d.universe;
    return z;
}

DatasetSpec dataset(const DataArgs& d) {
    DatasetSpec s;
    s.zipf = parse_zipf(d);
    s.format = trace_format(d);
    if (!d.trace.empty()) s.trace = d.trace;
    return s;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--preset", c.preset, "Memory preset (16KB .. 128KB)");
    app->add_option_function<std::uint64_t>(
        "--seed",
        [&c](const std::uint64_t& v) {
            c.seed = v;
            c.seed_given = true;
        },
        "Master seed (default: $UCL_SEED, then 1)");
    app->add_option("--epochs", c.epochs, "Override training.epochs");
}

void add_data(CLI::App* app, DataArgs& d) {
    app->add_option("--zipf", d.zipf, "Synthetic stream SKEW[:LENGTH]");
    app->add_option("--universe", d.universe, "Distinct candidate keys of the synthetic stream");
    app->add_option("--trace", d.trace, "Read the stream from a trace file instead");
    app->add_option("--format", d.format, "Trace format: csv or raw");
    app->add_option("--key-len", d.key_len, "Trace key length in bytes");
    app->add_flag("--no-values", d.no_values, "Trace records carry no value (each counts 1)");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void print_accuracy(const AccuracyReport& a) {
    std::cout << "aae " << a.aae << "\nare " << a.are << "\nwmrd " << a.wmrd << "\nentropy " << a.entropy << '\n';
}

// Everything `query` needs to rebuild a QueryContext.
void save_state(const fs::path& dir, const Config& cfg, std::uint64_t seed, const IngestResult& data,
                const solver::SolverModel& model) {
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "state.json");
        f << nlohmann::json{{"seed", seed}, {"config", to_json(cfg)}}.dump(2) << '\n';
    }
    save_snapshot(dir / "snapshot.bin", data.final_snapshot);
    {
        std::ofstream f(dir / "reports.bin", std::ios::binary);
        std::uint64_t seq = 0;
        for (std::size_t i = 0; i < data.registry.size(); ++i) {
            const auto flag = data.registry.is_hot(i) ? ReportFlag::hot : ReportFlag::cold;
            write_report(f, KeyReport{data.registry.keys()[i], flag, ++seq});
        }
    }
    {
        std::ofstream f(dir / "heavy_filter.bin", std::ios::binary);
        write_heavy_filter(f, *data.heavy_filter);
    }
    solver::save_checkpoint(dir / "model.ckpt", model);
}

int cmd_generate(const Common& c, const DataArgs& d, const std::string& out, const std::optional<std::uint64_t>& perm) {
    if (out.empty()) throw ConfigError("generate needs --out");
    ZipfSpec z = parse_zipf(d);
    z.seed = resolve_seed(c);
    z.permutation_seed = perm;
    const auto items = generate(z);
    if (const auto parent = std::filesystem::path(out).parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    write_trace(out, trace_format(d), items);
    std::cerr << "wrote " << items.size() << " items to " << out << '\n';
    return 0;
}

int cmd_run(const Common& c, const DataArgs& d, const std::string& out, bool two_phase) {
    const Config cfg = resolve_config(c);
    const auto seed = resolve_seed(c);
    const auto items = load_dataset(dataset(d), seed);
    std::cerr << "ingesting " << items.size() << " items (" << cfg.name << ", " << cfg.sketch.memory_bytes()
              << " bytes)\n";

    auto progress = [](const solver::EpochLoss& e) {
        if (e.epoch % 10 == 0) std::cerr << "epoch " << e.epoch << " loss " << e.loss.total << '\n';
    };
    IngestResult data;
    TrainedModel trained;
    if (two_phase) {
        data = ingest(cfg.sketch, seed, items, cfg.training.window_len);
        trained = train_offline(cfg, Variant::full, data, seed, progress);
    } else {
        std::tie(data, trained) = run_concurrent(cfg, Variant::full, seed, items, progress);
    }

    std::vector<Key> keys;
    for (const auto& [k, v] : data.truth) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::vector<Count> truth;
    for (const auto& k : keys) truth.push_back(data.truth.at(k));
    const auto est = estimate("ucl", data, trained.model.get(), keys);
    std::cout << "items " << data.items << "\ndistinct " << keys.size() << "\nregistry " << data.registry.size()
              << "\nepochs " << trained.report.epochs.size() << '\n';
    print_accuracy(evaluate(truth, est));

    if (!out.empty()) {
        save_state(out, cfg, seed, data, *trained.model);
        std::ofstream f(fs::path(out) / "train.csv");
        solver::write_train_csv(f, trained.report, cfg.training.equivariance);
        std::cerr << "state written to " << out << '\n';
    }
    return 0;
}

int cmd_query(const std::string& state) {
    if (state.empty()) throw ConfigError("query needs --state");
    const fs::path dir(state);
    std::ifstream sf(dir / "state.json");
    if (!sf) throw ConfigError("no state.json in " + state);
    const auto doc = nlohmann::json::parse(sf);
    const auto seed = doc.at("seed").get<std::uint64_t>();
    const Config cfg = parse_config(doc.at("config"));

    auto registry = std::make_shared<KeyRegistry>();
    {
        std::ifstream f(dir / "reports.bin", std::ios::binary);
        if (!f) throw FormatError("cannot read reports.bin");
        while (auto r = read_report(f)) registry->handle_report(*r);
    }
    HeavyFilter hf(cfg.sketch.hf_slots, HashFamily::derive(seed, SeedSpace::heavy_filter, 1));
    {
        std::ifstream f(dir / "heavy_filter.bin", std::ios::binary);
        if (!f) throw FormatError("cannot read heavy_filter.bin");
        read_heavy_filter(f, hf);
    }
    auto model = std::make_shared<const solver::SolverModel>(solver::load_checkpoint(dir / "model.ckpt"));
    const QueryContext ctx(model, load_snapshot(dir / "snapshot.bin"), registry, hf, cfg.sketch.sensing);

    std::string line;
    while (std::getline(std::cin, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        Key key;
        try {
            key = Key::from_hex(line);
        } catch (const FormatError& e) {
            throw ConfigError("bad key '" + line + "': " + e.what());
        }
        std::cout << ctx.query(key) << '\n';
    }
    return 0;
}

ExperimentPlan make_plan(const Common& c, const DataArgs& d, const std::string& presets, const std::string& out,
                         bool two_phase) {
    ExperimentPlan plan;
    plan.base = resolve_config(c);
    plan.data = dataset(d);
    plan.presets = presets.empty() ? std::vector<std::string>{plan.base.name == "custom" ? "16KB" : plan.base.name}
                                   : split_list(presets);
    plan.out_dir = out;
    plan.two_phase = two_phase;
    return plan;
}

int finish_plan(const ExperimentPlan& plan) {
    const auto result = run_plan(plan, [](const std::string& m) { std::cerr << m << '\n'; });
    if (plan.out_dir.empty()) write_results_csv(std::cout, result.rows);
    return 0;
}

int cmd_bench(const Common& c, const DataArgs& d, const std::string& presets, const std::string& algos,
              std::uint32_t seeds, const std::string& out, bool two_phase) {
    Common cc = c;
    cc.preset.clear();
    auto plan = make_plan(cc, d, presets.empty() ? c.preset : presets, out, two_phase);
    plan.algorithms = split_list(algos);
    const auto base = resolve_seed(c);
    plan.seeds.clear();
    for (std::uint32_t i = 0; i < seeds; ++i) plan.seeds.push_back(base + i);
    return finish_plan(plan);
}

int cmd_ablate(const Common& c, const DataArgs& d, const std::string& variants, std::uint32_t seeds,
               const std::string& out) {
    Common cc = c;
    cc.preset.clear();
    auto plan = make_plan(cc, d, c.preset, out, true);
    plan.algorithms = {"ucl"};
    plan.variants = {Variant::full};
    for (const auto& v : split_list(variants)) {
        const auto parsed = parse_variant(v);
        if (parsed != Variant::full) plan.variants.push_back(parsed);
    }
    const auto base = resolve_seed(c);
    plan.seeds.clear();
    for (std::uint32_t i = 0; i < seeds; ++i) plan.seeds.push_back(base + i);
    return finish_plan(plan);
}

int cmd_inspect(const Common& c, const std::string& snapshot, const std::string& checkpoint) {
    if (!snapshot.empty()) {
        const auto s = load_snapshot(snapshot);
        std::uint64_t total = 0;
        for (std::uint32_t i = 0; i < s.width; ++i) total += s.counters[i];
        std::cout << nlohmann::json{{"depth", s.depth},
                                    {"width", s.width},
                                    {"seq", s.seq},
                                    {"insert_count", s.insert_count},
                                    {"scale", s.scale},
                                    {"row0_sum", total}}
                         .dump(2)
                  << '\n';
    }
    if (!checkpoint.empty()) {
        const auto m = solver::load_checkpoint(checkpoint);
        const auto& sh = m.shape();
        std::cout << nlohmann::json{{"depth", sh.depth},
                                    {"width", sh.width},
                                    {"hidden", sh.hidden},
                                    {"bucket_len", sh.bucket_len},
                                    {"shared", sh.shared},
                                    {"num_buckets", sh.num_buckets},
                                    {"seed", m.seed()},
                                    {"parameters", m.parameter_count()}}
                         .dump(2)
                  << '\n';
    }
    if (snapshot.empty() && checkpoint.empty()) {
        const Config cfg = resolve_config(c);
        auto j = to_json(cfg);
        j["memory_bytes"] = cfg.sketch.memory_bytes();
        j["epsilon_c"] = cfg.sketch.epsilon_c();
        j["delta_c"] = cfg.sketch.delta_c();
        std::cout << j.dump(2) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    ucl::tune_allocator();
    CLI::App app{"Streaming frequency estimation with a learned sketch decoder"};
    app.require_subcommand(1);

    Common common;
    DataArgs data;
    std::string out, state, presets, algos = "ucl,cm", variants = "no-eq,no-sr,unshared", snapshot, checkpoint;
    std::uint32_t seeds = 1;
    bool two_phase = false;
    std::optional<std::uint64_t> perm;

    auto* gen = app.add_subcommand("generate", "Write a synthetic Zipf trace");
    add_common(gen, common);
    add_data(gen, data);
    gen->add_option("--out", out, "Output trace path (.gz compresses)");
    gen->add_option("--permute", perm, "Shuffle the rank-to-key mapping with this seed");

    auto* run = app.add_subcommand("run", "Ingest a stream, train the decoder, report accuracy");
    add_common(run, common);
    add_data(run, data);
    run->add_option("--out", out, "Directory for the query state");
    run->add_flag("--two-phase", two_phase, "Ingest fully, then train (deterministic)");

    auto* query = app.add_subcommand("query", "Answer hex keys from stdin, one count per line");
    query->add_option("--state", state, "State directory written by run --out")->required();

    auto* bench = app.add_subcommand("bench", "Sweep algorithms x presets x seeds into a metrics CSV");
    add_common(bench, common);
    add_data(bench, data);
    bench->add_option("--presets", presets, "Comma-separated presets (default: --preset or 16KB)");
    bench->add_option("--algo", algos, "Comma-separated algorithms: ucl,cm,cs,omp,lsqr");
    bench->add_option("--seeds", seeds, "Number of consecutive seeds starting at --seed");
    bench->add_option("--out", out, "Output directory (default: CSV to stdout)");
    bench->add_flag("--two-phase", two_phase, "Ingest fully, then train (deterministic)");

    auto* ablate = app.add_subcommand("ablate", "Train the full decoder and its ablations");
    add_common(ablate, common);
    add_data(ablate, data);
    ablate->add_option("--variant", variants, "Comma-separated: no-eq,no-sr,unshared");
    ablate->add_option("--seeds", seeds, "Number of consecutive seeds starting at --seed");
    ablate->add_option("--out", out, "Output directory (default: CSV to stdout)");

    auto* inspect = app.add_subcommand("inspect", "Describe a config, snapshot or checkpoint");
    add_common(inspect, common);
    inspect->add_option("--snapshot", snapshot, "Snapshot file");
    inspect->add_option("--checkpoint", checkpoint, "Checkpoint file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_generate(common, data, out, perm);
        if (run->parsed()) return cmd_run(common, data, out, two_phase);
        if (query->parsed()) return cmd_query(state);
        if (bench->parsed()) return cmd_bench(common, data, presets, algos, seeds, out, two_phase);
        if (ablate->parsed()) return cmd_ablate(common, data, variants, seeds, out);
        if (inspect->parsed()) return cmd_inspect(common, snapshot, checkpoint);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
