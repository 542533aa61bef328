#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucl/config.hpp"
#include "ucl/controlplane.hpp"
#include "ucl/dataplane.hpp"
#include "ucl/metrics.hpp"
#include "ucl/solver/model.hpp"
#include "ucl/solver/trainer.hpp"
#include "ucl/streamgen.hpp"

namespace ucl {

/// Decoders that can be benchmarked against each other.
const std::vector<std::string>& algorithm_names();

/// Training variants of the learned decoder.
enum class Variant { full, no_eq, no_sr, unshared };
std::string to_string(Variant v);
/// Accepts "full", "no-eq", "no-sr", "unshared"; throws ConfigError otherwise.
Variant parse_variant(std::string_view s);
/// Result label: "ucl" for the full model, "ucl-no-eq" etc. otherwise.
std::string variant_label(Variant v);

struct DatasetSpec {
    std::optional<std::filesystem::path> trace;
    TraceFormat format;
    ZipfSpec zipf;
    /// Use zipf.seed as is instead of the run seed.
    bool fixed_stream_seed = false;
};

struct ExperimentPlan {
    DatasetSpec data;
    std::vector<std::string> presets{"16KB"};
    std::vector<std::string> algorithms{"ucl", "cm"};
    std::vector<std::uint64_t> seeds{1};
    std::vector<Variant> variants{Variant::full};
    /// Training, bucket and Bloom settings; depth, width and heavy-filter
    /// slots come from each preset.
    Config base;
    bool two_phase = true;
    std::filesystem::path out_dir;

    /// Throws ConfigError on unknown presets or algorithms, empty lists, or a
    /// concurrent unshared run.
    void validate() const;
    /// The configuration every algorithm of one preset runs on.
    Config config_for(const std::string& preset) const;
};

/// One stream pushed through a data plane.
struct IngestResult {
    SketchConfig sketch;
    std::uint64_t master_seed = 0;
    KeyRegistry registry;
    solver::SlidingWindow window{1};
    Snapshot final_snapshot;
    /// Heavy filter at the time of final_snapshot.
    std::optional<HeavyFilter> heavy_filter;
    FrequencyTable truth;
    std::uint64_t items = 0;
    std::uint64_t max_update_hashes = 0;
    double seconds = 0;
};

IngestResult ingest(const SketchConfig& sketch, std::uint64_t master_seed, const std::vector<StreamItem>& items,
                    std::size_t window_len);

struct TrainedModel {
    std::shared_ptr<solver::SolverModel> model;
    solver::TrainReport report;
    double seconds = 0;
};

/// Two-phase training on the final window and registry of `data`.
TrainedModel train_offline(const Config& cfg, Variant variant, const IngestResult& data, std::uint64_t seed,
                           const std::function<void(const solver::EpochLoss&)>& on_epoch = {});

/// Ingestion and training on separate threads sharing a ControlPlane; the
/// trainer publishes a model after every epoch. Not bit-reproducible.
std::pair<IngestResult, TrainedModel> run_concurrent(const Config& cfg, Variant variant, std::uint64_t seed,
                                                     const std::vector<StreamItem>& items,
                                                     const std::function<void(const solver::EpochLoss&)>& on_epoch = {});

/// Per-key estimates for `keys`: heavy-filter count plus the decoder's sketch
/// part. `model` is needed for "ucl"; "cs" needs count-sketch counters.
std::vector<double> estimate(const std::string& algorithm, const IngestResult& data, const solver::SolverModel* model,
                             const std::vector<Key>& keys);

struct ResultRow {
    std::string algorithm;
    std::string memory;
    std::string metric;
    double value = 0;
    std::uint64_t seed = 0;
};

struct RunInfo {
    std::string algorithm;
    std::string memory;
    std::uint64_t seed = 0;
    std::size_t registry_size = 0;
    std::size_t hot_keys = 0;
    std::size_t distinct_keys = 0;
    std::uint32_t epochs = 0;
    double best_loss = 0;
    double ingest_mops = 0;
    double train_seconds = 0;
    solver::TrainReport train;
    bool equivariance = true;
};

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    std::vector<RunInfo> runs;
};

std::vector<StreamItem> load_dataset(const DatasetSpec& data, std::uint64_t seed);

/// Runs every (preset, seed, algorithm/variant) of the plan. When out_dir is
/// set, writes results.csv, one training-loss CSV per learned run and
/// manifest.json there.
ExperimentOutput run_plan(const ExperimentPlan& plan, const std::function<void(const std::string&)>& log = {});

/// algorithm,memory,metric,value,seed
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
nlohmann::json manifest(const ExperimentPlan& plan, const ExperimentOutput& output);

} // namespace ucl
