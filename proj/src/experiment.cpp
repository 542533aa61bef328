#include "ucl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include "ucl/errors.hpp"
#include "ucl/hash.hpp"
#include "ucl/recovery.hpp"
#include "ucl/sensing.hpp"
#include "ucl/solver/transform.hpp"

namespace ucl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

solver::ModelShape shape_for(const Config& cfg, Variant variant, std::size_t n) {
    solver::ModelShape s;
    s.depth = cfg.sketch.depth;
    s.width = cfg.sketch.width;
    s.hidden = cfg.buckets.hidden;
    s.bucket_len = cfg.buckets.length;
    s.shared = cfg.buckets.shared && variant != Variant::unshared;
    s.num_buckets = s.shared ? 1 : static_cast<std::uint32_t>(std::max<std::size_t>(1, solver::bucket_count(n, s.bucket_len)));
    return s;
}

TrainConfig training_for(const Config& cfg, Variant variant) {
    TrainConfig t = cfg.training;
    if (variant == Variant::no_eq) t.equivariance = false;
    if (variant == Variant::no_sr) t.lambda = 0;
    return t;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names{"ucl", "cm", "cs", "omp", "lsqr"};
    return names;
}

std::string to_string(Variant v) {
    switch (v) {
    case Variant::full: return "full";
    case Variant::no_eq: return "no-eq";
    case Variant::no_sr: return "no-sr";
    case Variant::unshared: return "unshared";
    }
    return "full";
}

Variant parse_variant(std::string_view s) {
    for (auto v : {Variant::full, Variant::no_eq, Variant::no_sr, Variant::unshared}) {
        if (s == to_string(v)) return v;
    }
    throw ConfigError("unknown variant '" + std::string(s) + "' (expected full, no-eq, no-sr or unshared)");
}

std::string variant_label(Variant v) { return v == Variant::full ? "ucl" : "ucl-" + to_string(v); }

void ExperimentPlan::validate() const {
    if (presets.empty()) throw ConfigError("plan needs at least one preset");
    if (algorithms.empty()) throw ConfigError("plan needs at least one algorithm");
    if (seeds.empty()) throw ConfigError("plan needs at least one seed");
    for (const auto& p : presets) config_for(p).validate();
    const auto& known = algorithm_names();
    for (const auto& a : algorithms) {
        if (std::find(known.begin(), known.end(), a) == known.end()) throw ConfigError("unknown algorithm '" + a + "'");
    }
    const bool learned = std::find(algorithms.begin(), algorithms.end(), "ucl") != algorithms.end();
    if (learned && variants.empty()) throw ConfigError("plan needs at least one variant for ucl");
    if (learned && !two_phase) {
        for (auto v : variants) {
            if (v == Variant::unshared || !base.buckets.shared) {
                throw ConfigError("unshared buckets need --two-phase (the head count is fixed by the final registry)");
            }
        }
    }
}

Config ExperimentPlan::config_for(const std::string& name) const {
    const Config p = preset(name);
    Config cfg = base;
    cfg.name = p.name;
    cfg.sketch.depth = p.sketch.depth;
    cfg.sketch.width = p.sketch.width;
    cfg.sketch.hf_slots = p.sketch.hf_slots;
    return cfg;
}

IngestResult ingest(const SketchConfig& sketch, std::uint64_t master_seed, const std::vector<StreamItem>& items,
                    std::size_t window_len) {
    IngestResult r;
    r.sketch = sketch;
    r.master_seed = master_seed;
    r.window = solver::SlidingWindow(window_len);
    DataPlane plane(sketch, master_seed);

    const auto t0 = Clock::now();
    for (const auto& item : items) {
        if (auto rep = plane.update(item)) r.registry.handle_report(*rep);
        r.max_update_hashes = std::max(r.max_update_hashes, plane.last_update_hash_invocations());
        if (auto snap = plane.maybe_snapshot()) r.window.push(std::move(*snap));
    }
    r.seconds = seconds_since(t0);

    for (const auto& item : items) r.truth[item.key] += item.value;
    r.items = items.size();
    r.final_snapshot = plane.snapshot();
    r.heavy_filter = plane.heavy_filter();
    return r;
}

TrainedModel train_offline(const Config& cfg, Variant variant, const IngestResult& data, std::uint64_t seed,
                           const std::function<void(const solver::EpochLoss&)>& on_epoch) {
    const std::size_t n = data.registry.size();
    TrainedModel out;
    out.model = std::make_shared<solver::SolverModel>(shape_for(cfg, variant, n),
                                                      derive_seed(seed, SeedSpace::model_init, 0));
    if (n == 0 || data.window.empty()) return out;

    const SketchHasher hasher(cfg.sketch.depth, cfg.sketch.width, data.master_seed, cfg.sketch.sensing);
    const SketchOperator a(hasher, data.registry.keys());
    const auto hot = data.registry.hot_positions();
    solver::Trainer trainer(*out.model, training_for(cfg, variant), cfg.sketch.sampling_interval,
                            derive_seed(seed, SeedSpace::training, 0), cfg.sketch.sensing);
    const auto t0 = Clock::now();
    out.report = trainer.train(data.window, a, hot, on_epoch);
    out.seconds = seconds_since(t0);
    return out;
}

std::pair<IngestResult, TrainedModel> run_concurrent(const Config& cfg, Variant variant, std::uint64_t seed,
                                                     const std::vector<StreamItem>& items,
                                                     const std::function<void(const solver::EpochLoss&)>& on_epoch) {
    if (variant == Variant::unshared || !cfg.buckets.shared) {
        throw ConfigError("unshared buckets need two-phase training");
    }
    const TrainConfig tcfg = training_for(cfg, variant);
    TrainedModel out;
    out.model = std::make_shared<solver::SolverModel>(shape_for(cfg, variant, 0),
                                                      derive_seed(seed, SeedSpace::model_init, 0));
    ControlPlane cp(tcfg.window_len, std::make_shared<const solver::SolverModel>(*out.model));

    IngestResult r;
    r.sketch = cfg.sketch;
    r.master_seed = seed;
    std::atomic<bool> done{false};
    std::optional<DataPlane> plane_out;

    std::thread writer([&] {
        DataPlane plane(cfg.sketch, seed);
        const auto t0 = Clock::now();
        for (const auto& item : items) {
            if (auto rep = plane.update(item)) cp.on_report(*rep);
            r.max_update_hashes = std::max(r.max_update_hashes, plane.last_update_hash_invocations());
            if (auto snap = plane.maybe_snapshot()) cp.on_snapshot(std::move(*snap));
        }
        r.seconds = seconds_since(t0);
        plane_out.emplace(std::move(plane));
        done.store(true);
    });

    const SketchHasher hasher(cfg.sketch.depth, cfg.sketch.width, seed, cfg.sketch.sensing);
    solver::Trainer trainer(*out.model, tcfg, cfg.sketch.sampling_interval, derive_seed(seed, SeedSpace::training, 0),
                            cfg.sketch.sensing);
    const auto t0 = Clock::now();
    std::uint32_t epochs = 0;
    std::exception_ptr failure;
    try {
        // While the stream is live every epoch sees the newest window.
        while (!done.load() && epochs < tcfg.epochs) {
            auto view = cp.training_view();
            if (view.window.empty() || view.registry->size() == 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(1));
                continue;
            }
            const SketchOperator a(hasher, view.registry->keys());
            const auto loss = trainer.run_epoch(view.window, a, view.registry->hot_positions());
            out.report.epochs.push_back(loss);
            if (on_epoch) on_epoch(loss);
            cp.publish(std::make_shared<const solver::SolverModel>(*out.model));
            ++epochs;
        }
    } catch (...) {
        failure = std::current_exception();
    }
    writer.join();
    if (failure) std::rethrow_exception(failure);

    auto view = cp.training_view();
    if (epochs < tcfg.epochs && !view.window.empty() && view.registry->size() > 0) {
        TrainConfig rest = tcfg;
        rest.epochs = tcfg.epochs - epochs;
        const SketchOperator a(hasher, view.registry->keys());
        const auto hot = view.registry->hot_positions();
        solver::Trainer tail(*out.model, rest, cfg.sketch.sampling_interval,
                             derive_seed(seed, SeedSpace::training, 1), cfg.sketch.sensing);
        auto report = tail.train(view.window, a, hot, on_epoch);
        for (auto& e : report.epochs) e.epoch += epochs;
        out.report.epochs.insert(out.report.epochs.end(), report.epochs.begin(), report.epochs.end());
        out.report.best_epoch = report.best_epoch + epochs;
        out.report.best_loss = report.best_loss;
        out.report.early_stopped = report.early_stopped;
        cp.publish(std::make_shared<const solver::SolverModel>(*out.model));
    } else if (!out.report.epochs.empty()) {
        out.report.best_epoch = out.report.epochs.back().epoch;
        out.report.best_loss = out.report.epochs.back().loss.total;
    }
    out.seconds = seconds_since(t0);

    r.registry = *view.registry;
    r.window = std::move(view.window);
    r.final_snapshot = plane_out->snapshot();
    r.heavy_filter = plane_out->heavy_filter();
    for (const auto& item : items) r.truth[item.key] += item.value;
    r.items = items.size();
    return {std::move(r), std::move(out)};
}

std::vector<double> estimate(const std::string& algorithm, const IngestResult& data, const solver::SolverModel* model,
                             const std::vector<Key>& keys) {
    const SketchHasher hasher(data.sketch.depth, data.sketch.width, data.master_seed, data.sketch.sensing);
    const auto& counters = data.final_snapshot.counters;
    const HeavyFilter& hf = *data.heavy_filter;
    std::vector<double> est(keys.size(), 0.0);

    auto registry_part = [&](const std::vector<double>& x) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (const auto pos = data.registry.position(keys[i])) est[i] = x[*pos];
        }
    };

    if (algorithm == "cm") {
        if (data.sketch.sensing != SensingMode::count_min) throw ConfigError("cm needs count-min counters");
        for (std::size_t i = 0; i < keys.size(); ++i) {
            est[i] = static_cast<double>(cm_point_query(counters, hasher, keys[i]));
        }
    } else if (algorithm == "cs") {
        if (data.sketch.sensing != SensingMode::count_sketch) throw ConfigError("cs needs count-sketch counters");
        for (std::size_t i = 0; i < keys.size(); ++i) {
            est[i] = static_cast<double>(std::max<std::int64_t>(0, cs_point_query(counters, hasher, keys[i])));
        }
    } else if (algorithm == "ucl") {
        if (!model) throw std::invalid_argument("ucl estimates need a model");
        const auto x = solver::recover_full(*model, data.final_snapshot, data.registry.size(), data.sketch.sensing);
        std::vector<double> xd(x.begin(), x.end());
        registry_part(xd);
    } else if (algorithm == "omp" || algorithm == "lsqr") {
        if (data.registry.size() > 0) {
            const SketchOperator a(hasher, data.registry.keys());
            std::vector<double> y(counters.size());
            for (std::size_t j = 0; j < y.size(); ++j) {
                y[j] = data.sketch.sensing == SensingMode::count_sketch
                           ? static_cast<double>(static_cast<std::int32_t>(counters[j]))
                           : static_cast<double>(counters[j]);
            }
            RecoveryResult res = algorithm == "omp" ? static_cast<RecoveryResult>(omp(a, y))
                                                    : lsqr(a, y, LsqrOptions{.max_iters = 1000, .atol = 1e-12, .nonnegative = true});
            registry_part(res.x_hat);
        }
    } else {
        throw ConfigError("unknown algorithm '" + algorithm + "'");
    }

    for (std::size_t i = 0; i < keys.size(); ++i) est[i] += static_cast<double>(hf.query(keys[i]));
    return est;
}

std::vector<StreamItem> load_dataset(const DatasetSpec& data, std::uint64_t seed) {
    if (data.trace) return read_trace(*data.trace, data.format);
    ZipfSpec z = data.zipf;
    if (!data.fixed_stream_seed) z.seed = seed;
    return generate(z);
}

ExperimentOutput run_plan(const ExperimentPlan& plan, const std::function<void(const std::string&)>& log) {
    plan.validate();
    auto say = [&](const std::string& msg) {
        if (log) log(msg);
    };
    const auto has = [&](const char* a) {
        return std::find(plan.algorithms.begin(), plan.algorithms.end(), a) != plan.algorithms.end();
    };

    ExperimentOutput out;
    for (const auto& memory : plan.presets) {
        const Config cfg = plan.config_for(memory);
        for (const auto seed : plan.seeds) {
            const auto items = load_dataset(plan.data, seed);
            say("preset " + memory + ", seed " + std::to_string(seed) + ": " + std::to_string(items.size()) + " items");

            std::optional<IngestResult> cm_data;
            if (has("cm") || has("omp") || has("lsqr") || (has("ucl") && plan.two_phase)) {
                SketchConfig sk = cfg.sketch;
                sk.sensing = SensingMode::count_min;
                cm_data = ingest(sk, seed, items, cfg.training.window_len);
            }

            std::vector<Key> keys;
            auto eval_keys = [&](const IngestResult& d) {
                if (!keys.empty()) return;
                keys.reserve(d.truth.size());
                for (const auto& [k, v] : d.truth) keys.push_back(k);
                std::sort(keys.begin(), keys.end());
            };
            std::vector<Count> truth;
            auto emit = [&](const std::string& algo, const IngestResult& d, const std::vector<double>& est,
                            RunInfo info) {
                if (truth.empty()) {
                    truth.reserve(keys.size());
                    for (const auto& k : keys) truth.push_back(d.truth.at(k));
                }
                const auto acc = evaluate(truth, est);
                for (const auto& [metric, value] : {std::pair<const char*, double>{"aae", acc.aae},
                                                    {"are", acc.are},
                                                    {"wmrd", acc.wmrd},
                                                    {"entropy", acc.entropy}}) {
                    out.rows.push_back(ResultRow{algo, memory, metric, value, seed});
                }
                info.algorithm = algo;
                info.memory = memory;
                info.seed = seed;
                info.registry_size = d.registry.size();
                info.hot_keys = d.registry.hot_count();
                info.distinct_keys = d.truth.size();
                info.ingest_mops = d.seconds > 0 ? throughput(d.items, d.seconds) : 0;
                out.runs.push_back(std::move(info));
                say("  " + algo + ": ARE " + format_value(acc.are) + ", WMRD " + format_value(acc.wmrd));
            };

            for (const auto& algo : plan.algorithms) {
                if (algo == "ucl") {
                    for (const auto variant : plan.variants) {
                        const auto label = variant_label(variant);
                        say("  training " + label);
                        std::optional<IngestResult> live;
                        TrainedModel trained;
                        if (plan.two_phase) {
                            trained = train_offline(cfg, variant, *cm_data, seed);
                        } else {
                            auto [d, t] = run_concurrent(cfg, variant, seed, items);
                            live.emplace(std::move(d));
                            trained = std::move(t);
                        }
                        const IngestResult& d = live ? *live : *cm_data;
                        eval_keys(d);
                        RunInfo info;
                        info.epochs = static_cast<std::uint32_t>(trained.report.epochs.size());
                        info.best_loss = trained.report.best_loss;
                        info.train_seconds = trained.seconds;
                        info.train = trained.report;
                        info.equivariance = training_for(cfg, variant).equivariance;
                        emit(label, d, estimate("ucl", d, trained.model.get(), keys), std::move(info));
                    }
                } else if (algo == "cs") {
                    SketchConfig sk = cfg.sketch;
                    sk.sensing = SensingMode::count_sketch;
                    const auto cs_data = ingest(sk, seed, items, cfg.training.window_len);
                    eval_keys(cs_data);
                    emit(algo, cs_data, estimate("cs", cs_data, nullptr, keys), {});
                } else {
                    eval_keys(*cm_data);
                    emit(algo, *cm_data, estimate(algo, *cm_data, nullptr, keys), {});
                }
            }
        }
    }

    if (!plan.out_dir.empty()) {
        std::filesystem::create_directories(plan.out_dir);
        {
            std::ofstream f(plan.out_dir / "results.csv", std::ios::binary);
            if (!f) throw FormatError("cannot write " + (plan.out_dir / "results.csv").string());
            write_results_csv(f, out.rows);
        }
        for (const auto& run : out.runs) {
            if (run.train.epochs.empty()) continue;
            const auto name = "train_" + run.algorithm + "_" + run.memory + "_" + std::to_string(run.seed) + ".csv";
            std::ofstream f(plan.out_dir / name, std::ios::binary);
            solver::write_train_csv(f, run.train, run.equivariance);
        }
        std::ofstream f(plan.out_dir / "manifest.json", std::ios::binary);
        f << manifest(plan, out).dump(2) << '\n';
    }
    return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "algorithm,memory,metric,value,seed\n";
    for (const auto& r : rows) {
        out << r.algorithm << ',' << r.memory << ',' << r.metric << ',' << format_value(r.value) << ',' << r.seed
            << '\n';
    }
}

nlohmann::json manifest(const ExperimentPlan& plan, const ExperimentOutput& output) {
    nlohmann::json j;
    j["presets"] = plan.presets;
    j["algorithms"] = plan.algorithms;
    j["seeds"] = plan.seeds;
    std::vector<std::string> variants;
    for (auto v : plan.variants) variants.push_back(to_string(v));
    j["variants"] = variants;
    j["two_phase"] = plan.two_phase;
    j["hash_algorithm"] = std::string(HashFamily::kAlgorithm);
    nlohmann::json data;
    if (plan.data.trace) {
        data["trace"] = plan.data.trace->string();
        data["format"] = plan.data.format.variant == TraceVariant::csv ? "csv" : "raw";
        data["key_len"] = plan.data.format.key_len;
    } else {
        data["zipf"] = {{"skew", plan.data.zipf.skew},
                        {"universe", plan.data.zipf.universe},
                        {"length", plan.data.zipf.length}};
        if (plan.data.fixed_stream_seed) data["zipf"]["seed"] = plan.data.zipf.seed;
    }
    j["dataset"] = data;
    nlohmann::json configs = nlohmann::json::object();
    for (const auto& p : plan.presets) {
        const auto cfg = plan.config_for(p);
        auto c = to_json(cfg);
        c["memory_bytes"] = cfg.sketch.memory_bytes();
        configs[p] = c;
    }
    j["configs"] = configs;
    j["omp"] = {{"max_sparsity", "rows"}, {"residual_tol", OmpOptions{}.residual_tol}, {"nonnegative", true}};
    j["lsqr"] = {{"max_iters", 1000}, {"atol", 1e-12}, {"nonnegative", true}};
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : output.runs) {
        runs.push_back({{"algorithm", r.algorithm},
                        {"memory", r.memory},
                        {"seed", r.seed},
                        {"distinct_keys", r.distinct_keys},
                        {"registry_size", r.registry_size},
                        {"hot_keys", r.hot_keys},
                        {"epochs", r.epochs},
                        {"best_loss", r.best_loss},
                        {"ingest_mops", r.ingest_mops},
                        {"train_seconds", r.train_seconds}});
    }
    j["runs"] = runs;
    return j;
}

} // namespace ucl
