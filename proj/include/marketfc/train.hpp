#pragma once

#include "marketfc/data.hpp"
#include "marketfc/forecast/mlp.hpp"
#include "marketfc/forecast/optimizer.hpp"
#include "marketfc/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace marketfc::train {

enum class Regime { normal, augmented, meta };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& text);

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    std::size_t patience = 10;  // epochs without validation improvement; 0 disables early stopping
    Regime regime = Regime::normal;

    [[nodiscard]] std::vector<std::string> violations() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean batch loss over the epoch's updates
    double val_rmse = 0.0;    // de-normalized; NaN without a validation set
    std::size_t updates = 0;
    double elapsed_seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 1-based; 0 means the initial parameters were kept
    double best_val_rmse = 0.0;
    std::size_t total_updates = 0;
    forecast::AdamState optimizer_state;  // at the end of training
};

/// RMSE of the model's de-normalized predictions against the raw targets.
double validation_rmse(const forecast::GradientModel& model, const data::WindowedDataset& dataset);

/// Epoch loop over seeded mini-batches with Adam. With a non-empty validation
/// set the best-on-validation parameters are restored at the end.
TrainHistory train_normal(forecast::GradientModel& model, const data::WindowedDataset& train_set,
                          const TrainConfig& config, const data::WindowedDataset* val = nullptr);

// ---------------------------------------------------------------------------
// Data augmentation: random interleaving of synthetic and real batches.

enum class BatchSource { synthetic, real };

struct ScheduledBatch {
    BatchSource source = BatchSource::real;
    std::size_t index = 0;  // position within that loader's epoch order
};

struct AugmentationEpoch {
    std::vector<ScheduledBatch> consumed;  // in update order
    std::size_t draws = 0;                 // uniform draws, including no-op ones
};

/// One epoch of the interleaving loop: draw a ~ U(0,1); a > 0.5 takes the next
/// synthetic batch if any remain, otherwise the next real batch if any remain;
/// a draw whose side is exhausted does nothing. Ends when both are exhausted.
AugmentationEpoch augmentation_schedule(std::size_t synthetic_batches, std::size_t real_batches, Rng& rng);

struct AugmentedHistory {
    TrainHistory history;
    std::vector<AugmentationEpoch> schedule;  // one entry per epoch
    std::size_t synthetic_batches = 0;
    std::size_t real_batches = 0;
};

/// `synthetic` must already share the real lookback length (see
/// data::interpolate_dataset).
AugmentedHistory train_augmented(forecast::GradientModel& model, const data::WindowedDataset& real,
                                 const data::WindowedDataset& synthetic, const TrainConfig& config,
                                 const data::WindowedDataset* val = nullptr);

// ---------------------------------------------------------------------------
// First-order MAML.

struct MetaConfig {
    std::size_t k = 5;   // support windows per task
    std::size_t r = 5;   // query windows per task
    std::size_t a = 50;  // offsets j ~ U[1, a]
    double inner_lr = 0.01;
    std::size_t inner_steps = 5;
    double meta_lr = 1e-3;
    std::size_t meta_batch = 8;
    std::size_t meta_iterations = 1000;
    forecast::OptimizerKind outer_optimizer = forecast::OptimizerKind::adam;

    [[nodiscard]] std::vector<std::string> violations() const;
};

/// Support windows end before the anchor, query windows start after it.
/// Window i covers [start, start + lookback + horizon) of the source series;
/// `data::Window::origin` is start + lookback.
struct MetaTask {
    std::size_t anchor = 0;
    data::WindowedDataset support;
    data::WindowedDataset query;
};

/// Normalized matrices of a task.
struct TaskBatch {
    data::Batch support;
    data::Batch query;
};

TaskBatch to_task_batch(const MetaTask& task);

/// Smallest series length for which an anchor d with d >= l + a and
/// d + l + a <= length exists.
std::size_t min_meta_series_length(std::size_t lookback, std::size_t horizon, std::size_t a);

/// Anchors are drawn uniformly over the series and re-drawn until valid.
/// Support windows are [d - l - j, d - j), query windows [d + j, d + j + l),
/// with independent j ~ U[1, a].
std::vector<MetaTask> build_meta_tasks(const data::RawSeries& series, std::size_t lookback, std::size_t horizon,
                                       std::size_t count, const MetaConfig& meta, std::uint64_t seed);

struct MetaRecord {
    std::size_t iteration = 0;
    double meta_loss = 0.0;  // mean query loss at the adapted parameters
    double elapsed_seconds = 0.0;
};

struct MetaHistory {
    std::vector<MetaRecord> iterations;
    forecast::AdamState optimizer_state;  // outer optimizer at the end of training
};

/// Inner loop: `inner_steps` plain SGD steps on the support loss. The outer
/// update applies the mean query gradient taken at the adapted parameters.
/// Throws gradient_explosion if the meta-loss or its gradient is non-finite.
MetaHistory fomaml_train(forecast::GradientModel& model, std::span<const TaskBatch> tasks, const MetaConfig& meta,
                         std::uint64_t seed);
MetaHistory fomaml_train(forecast::GradientModel& model, std::span<const MetaTask> tasks, const MetaConfig& meta,
                         std::uint64_t seed);

std::unique_ptr<forecast::GradientModel> adapt(const forecast::GradientModel& model, const data::Batch& support,
                                               const MetaConfig& meta);
std::unique_ptr<forecast::GradientModel> adapt(const forecast::GradientModel& model, const MetaTask& task,
                                               const MetaConfig& meta);

}  // namespace marketfc::train
