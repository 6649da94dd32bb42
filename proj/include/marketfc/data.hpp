#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace marketfc::data {

enum class SeriesSource { synthetic, banknifty_like, forex_like };

std::string to_string(SeriesSource source);
SeriesSource parse_source(const std::string& text);

struct RawSeries {
    std::string id;
    std::vector<double> values;
    SeriesSource source = SeriesSource::synthetic;
};

/// Half-open [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Time-range split of a single series. Adjacent ranges may overlap by a few
/// steps; they must start in chronological order.
struct SplitSpec {
    IndexRange train;
    IndexRange val;
    IndexRange test;

    /// train [0,2050), val [2044,2306), test [2300,2562) on a 2562-step series.
    static SplitSpec forex();
    /// train [0,1050), val [1050,1194), test [1194,1338).
    static SplitSpec banknifty();

    [[nodiscard]] std::vector<std::string> violations(std::size_t series_len) const;
};

/// Series-level assignment for synthetic corpora: the first `train_series`
/// series train, the next `val_series` validate, the next `test_series` test.
struct SeriesSplitCounts {
    std::size_t train_series = 36;
    std::size_t val_series = 2;
    std::size_t test_series = 2;

    [[nodiscard]] std::size_t total() const noexcept { return train_series + val_series + test_series; }
};

struct SplitSeries {
    RawSeries train;
    RawSeries val;
    RawSeries test;
};

struct CsvLoad {
    RawSeries series;
    std::size_t dropped_rows = 0;
};

struct Window {
    std::string series_id;
    std::size_t origin = 0;  // index of the first target step in the source series
    std::vector<double> lookback;
    std::vector<double> target;
};

struct NormStats {
    double mean = 0.0;
    double std = 1.0;
};

/// Windows with their lookback statistics. Values are stored on the raw scale;
/// `batch` applies the per-window normalization.
struct WindowedDataset {
    std::vector<Window> windows;
    std::vector<NormStats> stats;
    std::size_t lookback_len = 0;
    std::size_t horizon = 0;

    [[nodiscard]] std::size_t size() const noexcept { return windows.size(); }
    [[nodiscard]] bool empty() const noexcept { return windows.empty(); }

    /// Appends another dataset with identical lookback/horizon.
    void append(const WindowedDataset& other);
    void push_back(Window window);
};

/// Row-per-window normalized inputs and targets.
struct Batch {
    Eigen::MatrixXd inputs;   // B x L
    Eigen::MatrixXd targets;  // B x H
};

inline constexpr double kDegenerateStd = 1e-8;

CsvLoad load_csv(const std::filesystem::path& path, const std::string& value_column,
                 SeriesSource source = SeriesSource::forex_like);

SplitSeries split(const RawSeries& series, const SplitSpec& spec);

/// Assigns whole series of a corpus to train/val/test by position.
struct CorpusSplit {
    std::vector<RawSeries> train;
    std::vector<RawSeries> val;
    std::vector<RawSeries> test;
};
CorpusSplit split_corpus(const std::vector<RawSeries>& corpus, const SeriesSplitCounts& counts);

/// Prefix/suffix cut used for the synthetic meta split (first `train_steps`
/// steps for meta-training, the remainder for meta-testing).
std::pair<RawSeries, RawSeries> split_at(const RawSeries& series, std::size_t train_steps);

WindowedDataset make_windows(const RawSeries& series, std::size_t lookback, std::size_t horizon,
                             std::size_t stride = 1);

NormStats compute_stats(std::span<const double> lookback);
std::pair<Window, NormStats> normalize_window(const Window& window);
std::vector<double> normalize(std::span<const double> values, const NormStats& stats);
std::vector<double> denormalize(std::span<const double> predictions, const NormStats& stats);

std::vector<double> interpolate_lookback(std::span<const double> lookback, std::size_t target_len);

/// Interpolates every lookback to `target_len` and recomputes the statistics.
WindowedDataset interpolate_dataset(const WindowedDataset& dataset, std::size_t target_len);

/// Seeded subset of `count` distinct windows (all windows if count >= size).
WindowedDataset subsample(const WindowedDataset& dataset, std::size_t count, std::uint64_t seed);

/// Seeded shuffle of window indices chunked into batches of at most batch_size.
std::vector<std::vector<std::size_t>> batches(const WindowedDataset& dataset, std::size_t batch_size,
                                              std::uint64_t seed);

Batch make_batch(const WindowedDataset& dataset, std::span<const std::size_t> indices);
Batch make_batch(const WindowedDataset& dataset);

}  // namespace marketfc::data
