#pragma once

#include "marketfc/data.hpp"
#include "marketfc/forecast/forecaster.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace marketfc::eval {

enum class Bucket { step1, step5, steps6to10, all10 };

inline constexpr std::array<Bucket, 4> kBuckets{Bucket::step1, Bucket::step5, Bucket::steps6to10, Bucket::all10};
inline constexpr std::size_t kEvalHorizon = 10;

/// File label: "step1", "step5", "steps6to10", "all10".
std::string to_string(Bucket bucket);
Bucket parse_bucket(const std::string& text);
/// Table label: "OS", "step5", "6-10", "TS".
std::string display_label(Bucket bucket);
/// 1-based inclusive step range covered by a bucket.
std::pair<std::size_t, std::size_t> bucket_steps(Bucket bucket);

double rmse(std::span<const double> predictions, std::span<const double> actuals);
/// Mean absolute percentage error as a fraction (0.10 for 10%).
double mape(std::span<const double> predictions, std::span<const double> actuals);

/// Raw-scale H-step forecasts and outcomes, one row per forecast origin.
struct ForecastRecords {
    std::size_t horizon = 0;
    std::vector<std::vector<double>> predictions;
    std::vector<std::vector<double>> actuals;

    [[nodiscard]] std::size_t size() const noexcept { return predictions.size(); }
    void append(const ForecastRecords& other);
};

struct BucketMetrics {
    Bucket bucket = Bucket::all10;
    double rmse = 0.0;
    double mape = 0.0;
    std::size_t n_forecasts = 0;
};

/// Pools the (prediction, actual) pairs of every origin over each bucket's steps.
std::vector<BucketMetrics> decompose_horizon(const ForecastRecords& records);

/// Rolls the forecast origin through `series` with stride 1. Normalized
/// forecasters get the z-scored lookback and are de-normalized here; raw
/// forecasters get the full trailing history (`history_prefix` followed by the
/// series up to the origin). The first origin is the earliest index with at
/// least `lookback` series values and `min_history` raw values (prefix
/// included) before it.
ForecastRecords evaluate_rolling(const forecast::Forecaster& forecaster, std::span<const double> series,
                                 std::size_t lookback, std::size_t horizon,
                                 std::span<const double> history_prefix = {}, std::size_t min_history = 0);

/// Evaluates a pre-windowed set (e.g. meta-task query windows). Raw
/// forecasters only see the window's lookback as history.
ForecastRecords evaluate_windows(const forecast::Forecaster& forecaster, const data::WindowedDataset& windows);

struct ReportRow {
    std::string dataset;
    std::string regime;
    std::string model;
    bool deep = false;
    Bucket bucket = Bucket::all10;
    double rmse = 0.0;
    double mape = 0.0;
    std::size_t n_forecasts = 0;
    double runtime_seconds = 0.0;  // not written to report files
};

struct EvalReport {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<ReportRow> rows;

    void add(const std::string& dataset, const std::string& regime, const std::string& model, bool deep,
             const std::vector<BucketMetrics>& metrics, double runtime_seconds);
};

/// Flat rows: dataset,regime,model,family,bucket,metric,value,config_hash,seed.
std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(const std::string& text);
/// Nested dataset -> regime -> model -> bucket -> {rmse, mape, n_forecasts}.
nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& doc);

/// Aligned text grid, one line per (dataset, regime, bucket), with per-model
/// RMSE/MAPE, the deep-model average and the lowest-RMSE model.
std::string render_table(const EvalReport& report);

/// Writes report.csv and report.json into `dir`; returns the table.
std::string render_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace marketfc::eval
