#pragma once

#include "marketfc/data.hpp"
#include "marketfc/eval.hpp"
#include "marketfc/forecast/mlp.hpp"
#include "marketfc/simgen.hpp"
#include "marketfc/train.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace marketfc::experiment {

enum class DatasetKind { synthetic, csv };

struct SyntheticDatasetConfig {
    simgen::GeneratorConfig generator;
    std::size_t count = 40;
    std::optional<std::uint64_t> base_seed;  // defaults to the root seed
    data::SeriesSplitCounts split;
    std::size_t meta_train_steps = 400;  // first steps of every series; the rest is meta-test
};

struct CsvDatasetConfig {
    std::string path;
    std::string value_column = "close";
    data::SeriesSource source = data::SeriesSource::forex_like;
    data::SplitSpec split = data::SplitSpec::forex();
    std::optional<std::size_t> meta_train_end;  // defaults to split.train.end
};

struct DatasetConfig {
    std::string name = "synthetic";
    DatasetKind kind = DatasetKind::synthetic;
    SyntheticDatasetConfig synthetic;
    CsvDatasetConfig csv;
};

struct ArimaGridConfig {
    std::size_t max_p = 3;
    std::size_t max_d = 2;
    std::size_t max_q = 3;
};

struct MlpConfig {
    std::vector<std::size_t> hidden{128, 128};
    forecast::Activation activation = forecast::Activation::relu;
};

/// Synthetic corpus mixed into real-data training.
struct AugmentConfig {
    simgen::GeneratorConfig generator;
    std::size_t count = 40;
    std::uint64_t base_seed = 1000;
    std::size_t synthetic_lookback = 5;
};

struct MetaRunConfig {
    train::MetaConfig meta;
    std::size_t train_tasks_per_series = 100;
    std::size_t test_tasks_per_series = 20;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    DatasetConfig dataset;
    std::optional<std::size_t> lookback;  // defaults: 5 synthetic, 20 csv
    std::size_t horizon = 10;
    /// Rolling evaluation starts once this many raw observations precede the
    /// origin (so rolling ARIMA refits have enough history).
    std::size_t min_history = 100;
    std::vector<std::string> models{"arima", "mlp"};
    std::vector<std::string> regimes{"normal"};
    ArimaGridConfig arima;
    MlpConfig mlp;
    train::TrainConfig train;
    AugmentConfig augment;
    MetaRunConfig meta;

    [[nodiscard]] std::size_t effective_lookback() const;
    [[nodiscard]] std::uint64_t effective_base_seed() const;
};

inline const std::vector<std::string> kKnownModels{"arima", "mlp", "persistence", "oracle"};

/// Parses a config document, filling defaults. Unknown keys and type errors
/// throw invalid_config.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config (every default explicit) with sorted keys.
nlohmann::json to_json(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

nlohmann::json to_json(const simgen::GeneratorConfig& config);

/// Invariant violations; with `check_data` the CSV is opened and split
/// bounds are checked against its length.
std::vector<std::string> validate(const ExperimentConfig& config, bool check_data = true);

/// Largest offset bound <= a that leaves a valid anchor in a series of `length`.
std::size_t feasible_offset_bound(std::size_t length, std::size_t window, std::size_t a);

struct GenerateResult {
    std::vector<std::filesystem::path> files;
    std::filesystem::path manifest;
};

/// Writes one `t,price` CSV per series plus manifest.json.
GenerateResult run_generate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct BenchmarkResult {
    eval::EvalReport report;
    std::string table;
};

/// Runs every (model, regime) cell and writes report.csv, report.json,
/// training logs, checkpoints and timing.json into `out_dir`.
BenchmarkResult run_benchmark(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace marketfc::experiment
