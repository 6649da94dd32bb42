#include "marketfc/train.hpp"

#include "marketfc/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace marketfc::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t epoch_seed(std::uint64_t root, std::string_view stream, std::size_t epoch) {
    return derive_seed(root, std::string(stream) + "/" + std::to_string(epoch));
}

// Applies one optimizer update from a batch and returns its loss.
double update_on(forecast::GradientModel& model, forecast::Optimizer& optimizer, const data::Batch& batch) {
    auto [loss, grads] = model.loss_and_gradients(batch.inputs, batch.targets);
    Eigen::VectorXd params = model.parameters();
    optimizer.step(params, grads);
    model.set_parameters(params);
    return loss;
}

struct BestTracker {
    bool enabled = false;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t since_best = 0;
    Eigen::VectorXd params;
};

// Records validation RMSE and returns true when training should stop.
bool track(BestTracker& tracker, const forecast::GradientModel& model, const data::WindowedDataset* val,
           EpochRecord& record, std::size_t patience) {
    if (!tracker.enabled) {
        record.val_rmse = std::numeric_limits<double>::quiet_NaN();
        return false;
    }
    record.val_rmse = validation_rmse(model, *val);
    if (record.val_rmse < tracker.best) {
        tracker.best = record.val_rmse;
        tracker.best_epoch = record.epoch;
        tracker.since_best = 0;
        tracker.params = model.parameters();
        return false;
    }
    ++tracker.since_best;
    return patience > 0 && tracker.since_best >= patience;
}

void finish(BestTracker& tracker, forecast::GradientModel& model, TrainHistory& history) {
    if (tracker.enabled && tracker.best_epoch > 0) {
        model.set_parameters(tracker.params);
        history.best_epoch = tracker.best_epoch;
        history.best_val_rmse = tracker.best;
    } else if (tracker.enabled) {
        history.best_val_rmse = tracker.best;
    } else {
        history.best_epoch = history.epochs.empty() ? 0 : history.epochs.back().epoch;
        history.best_val_rmse = std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::normal: return "normal";
        case Regime::augmented: return "augmented";
        case Regime::meta: return "meta";
    }
    return "normal";
}

Regime parse_regime(const std::string& text) {
    if (text == "normal") return Regime::normal;
    if (text == "augmented") return Regime::augmented;
    if (text == "meta") return Regime::meta;
    throw Error(ErrorCode::invalid_argument, "unknown regime '" + text + "'");
}

std::vector<std::string> TrainConfig::violations() const {
    std::vector<std::string> out;
    if (batch_size == 0) out.emplace_back("train.batch_size must be positive");
    if (!(lr > 0.0) || !std::isfinite(lr)) out.emplace_back("train.lr must be positive");
    return out;
}

std::vector<std::string> MetaConfig::violations() const {
    std::vector<std::string> out;
    if (k == 0) out.emplace_back("meta.k must be positive");
    if (r == 0) out.emplace_back("meta.r must be positive");
    if (a == 0) out.emplace_back("meta.a must be >= 1");
    if (!(inner_lr > 0.0)) out.emplace_back("meta.inner_lr must be positive");
    if (!(meta_lr >= 0.0)) out.emplace_back("meta.meta_lr must be >= 0");
    if (meta_batch == 0) out.emplace_back("meta.meta_batch must be positive");
    return out;
}

double validation_rmse(const forecast::GradientModel& model, const data::WindowedDataset& dataset) {
    if (dataset.empty()) throw Error(ErrorCode::empty_dataset, "validation set is empty");
    const data::Batch batch = data::make_batch(dataset);
    const Eigen::MatrixXd out = model.forward(batch.inputs);
    double ss = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& stats = dataset.stats[i];
        const auto& target = dataset.windows[i].target;
        for (std::size_t h = 0; h < target.size(); ++h) {
            const double pred = out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) * stats.std + stats.mean;
            ss += (pred - target[h]) * (pred - target[h]);
            ++count;
        }
    }
    return std::sqrt(ss / static_cast<double>(count));
}

TrainHistory train_normal(forecast::GradientModel& model, const data::WindowedDataset& train_set,
                          const TrainConfig& config, const data::WindowedDataset* val) {
    if (train_set.empty()) throw Error(ErrorCode::empty_dataset, "training set is empty");
    const auto start = Clock::now();
    forecast::Optimizer optimizer(forecast::OptimizerKind::adam, config.lr);
    BestTracker tracker;
    tracker.enabled = val != nullptr && !val->empty();
    TrainHistory history;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochRecord record;
        record.epoch = epoch;
        double loss_sum = 0.0;
        for (const auto& indices : data::batches(train_set, config.batch_size, epoch_seed(config.seed, "normal", epoch))) {
            loss_sum += update_on(model, optimizer, data::make_batch(train_set, indices));
            ++record.updates;
        }
        record.train_loss = loss_sum / static_cast<double>(record.updates);
        history.total_updates += record.updates;
        const bool stop = track(tracker, model, val, record, config.patience);
        record.elapsed_seconds = seconds_since(start);
        history.epochs.push_back(record);
        if (!std::isfinite(record.train_loss)) {
            throw Error(ErrorCode::gradient_explosion, "training loss became non-finite at epoch " + std::to_string(epoch));
        }
        if (stop) break;
    }
    finish(tracker, model, history);
    history.optimizer_state = optimizer.state();
    return history;
}

AugmentationEpoch augmentation_schedule(std::size_t synthetic_batches, std::size_t real_batches, Rng& rng) {
    AugmentationEpoch epoch;
    std::size_t s = 0;
    std::size_t r = 0;
    while (s < synthetic_batches || r < real_batches) {
        const double a = rng.uniform();
        ++epoch.draws;
        if (a > 0.5) {
            if (s < synthetic_batches) epoch.consumed.push_back({BatchSource::synthetic, s++});
        } else {
            if (r < real_batches) epoch.consumed.push_back({BatchSource::real, r++});
        }
    }
    return epoch;
}

AugmentedHistory train_augmented(forecast::GradientModel& model, const data::WindowedDataset& real,
                                 const data::WindowedDataset& synthetic, const TrainConfig& config,
                                 const data::WindowedDataset* val) {
    if (!synthetic.empty() && !real.empty() &&
        (synthetic.lookback_len != real.lookback_len || synthetic.horizon != real.horizon)) {
        throw Error(ErrorCode::shape_mismatch, "synthetic windows must be interpolated to the real lookback length");
    }
    const auto start = Clock::now();
    forecast::Optimizer optimizer(forecast::OptimizerKind::adam, config.lr);
    BestTracker tracker;
    tracker.enabled = val != nullptr && !val->empty();
    Rng draws(derive_seed(config.seed, "augment/draws"));

    AugmentedHistory out;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto syn_batches = synthetic.empty()
                                     ? std::vector<std::vector<std::size_t>>{}
                                     : data::batches(synthetic, config.batch_size, epoch_seed(config.seed, "synthetic", epoch));
        const auto real_batches =
            real.empty() ? std::vector<std::vector<std::size_t>>{}
                         : data::batches(real, config.batch_size, epoch_seed(config.seed, "real", epoch));
        out.synthetic_batches = syn_batches.size();
        out.real_batches = real_batches.size();

        AugmentationEpoch schedule = augmentation_schedule(syn_batches.size(), real_batches.size(), draws);
        EpochRecord record;
        record.epoch = epoch;
        double loss_sum = 0.0;
        for (const auto& item : schedule.consumed) {
            const bool is_syn = item.source == BatchSource::synthetic;
            const auto& ds = is_syn ? synthetic : real;
            const auto& indices = is_syn ? syn_batches[item.index] : real_batches[item.index];
            loss_sum += update_on(model, optimizer, data::make_batch(ds, indices));
            ++record.updates;
        }
        record.train_loss = record.updates > 0 ? loss_sum / static_cast<double>(record.updates) : 0.0;
        out.history.total_updates += record.updates;
        const bool stop = track(tracker, model, val, record, config.patience);
        record.elapsed_seconds = seconds_since(start);
        out.history.epochs.push_back(record);
        out.schedule.push_back(std::move(schedule));
        if (!std::isfinite(record.train_loss)) {
            throw Error(ErrorCode::gradient_explosion, "training loss became non-finite at epoch " + std::to_string(epoch));
        }
        if (stop) break;
    }
    finish(tracker, model, out.history);
    out.history.optimizer_state = optimizer.state();
    return out;
}

TaskBatch to_task_batch(const MetaTask& task) {
    return TaskBatch{data::make_batch(task.support), data::make_batch(task.query)};
}

std::size_t min_meta_series_length(std::size_t lookback, std::size_t horizon, std::size_t a) {
    return 2 * (lookback + horizon + a);
}

std::vector<MetaTask> build_meta_tasks(const data::RawSeries& series, std::size_t lookback, std::size_t horizon,
                                       std::size_t count, const MetaConfig& meta, std::uint64_t seed) {
    if (const auto problems = meta.violations(); !problems.empty()) {
        throw Error(ErrorCode::invalid_argument, problems.front());
    }
    if (lookback == 0 || horizon == 0) throw Error(ErrorCode::invalid_argument, "lookback and horizon must be positive");
    const std::size_t len = series.values.size();
    const std::size_t l = lookback + horizon;
    if (len < min_meta_series_length(lookback, horizon, meta.a)) {
        throw Error(ErrorCode::series_too_short,
                    "series '" + series.id + "' of length " + std::to_string(len) +
                        " admits no meta-task anchor (needs " +
                        std::to_string(min_meta_series_length(lookback, horizon, meta.a)) + ")");
    }

    Rng rng(seed);
    auto make_window = [&](std::size_t begin) {
        data::Window w;
        w.series_id = series.id;
        w.origin = begin + lookback;
        const auto* base = series.values.data();
        w.lookback.assign(base + begin, base + begin + lookback);
        w.target.assign(base + begin + lookback, base + begin + l);
        return w;
    };

    std::vector<MetaTask> tasks;
    tasks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t d = 0;
        do {
            d = static_cast<std::size_t>(rng.uniform_int(0, len - 1));
        } while (d < l + meta.a || d + l + meta.a > len);

        MetaTask task;
        task.anchor = d;
        task.support.lookback_len = task.query.lookback_len = lookback;
        task.support.horizon = task.query.horizon = horizon;
        for (std::size_t s = 0; s < meta.k; ++s) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(1, meta.a));
            task.support.push_back(make_window(d - l - j));
        }
        for (std::size_t q = 0; q < meta.r; ++q) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(1, meta.a));
            task.query.push_back(make_window(d + j));
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::unique_ptr<forecast::GradientModel> adapt(const forecast::GradientModel& model, const data::Batch& support,
                                               const MetaConfig& meta) {
    auto adapted = model.clone();
    forecast::Optimizer sgd(forecast::OptimizerKind::sgd, meta.inner_lr);
    for (std::size_t step = 0; step < meta.inner_steps; ++step) update_on(*adapted, sgd, support);
    return adapted;
}

std::unique_ptr<forecast::GradientModel> adapt(const forecast::GradientModel& model, const MetaTask& task,
                                               const MetaConfig& meta) {
    return adapt(model, data::make_batch(task.support), meta);
}

MetaHistory fomaml_train(forecast::GradientModel& model, std::span<const TaskBatch> tasks, const MetaConfig& meta,
                         std::uint64_t seed) {
    if (tasks.empty()) throw Error(ErrorCode::empty_dataset, "no meta-training tasks");
    if (const auto problems = meta.violations(); !problems.empty()) {
        throw Error(ErrorCode::invalid_argument, problems.front());
    }
    const auto start = Clock::now();
    Rng rng(seed);
    forecast::Optimizer outer(meta.outer_optimizer, meta.meta_lr);
    MetaHistory history;
    for (std::size_t it = 1; it <= meta.meta_iterations; ++it) {
        Eigen::VectorXd meta_grad = Eigen::VectorXd::Zero(model.parameters().size());
        double meta_loss = 0.0;
        for (std::size_t b = 0; b < meta.meta_batch; ++b) {
            const auto& task = tasks[static_cast<std::size_t>(rng.uniform_int(0, tasks.size() - 1))];
            const auto adapted = adapt(model, task.support, meta);
            const auto [loss, grads] = adapted->loss_and_gradients(task.query.inputs, task.query.targets);
            meta_loss += loss;
            meta_grad += grads;
        }
        const double scale = 1.0 / static_cast<double>(meta.meta_batch);
        meta_loss *= scale;
        meta_grad *= scale;
        if (!std::isfinite(meta_loss) || !meta_grad.allFinite()) {
            throw Error(ErrorCode::gradient_explosion,
                        "meta-loss became non-finite at meta-iteration " + std::to_string(it));
        }
        Eigen::VectorXd params = model.parameters();
        outer.step(params, meta_grad);
        model.set_parameters(params);
        history.iterations.push_back(MetaRecord{it, meta_loss, seconds_since(start)});
    }
    history.optimizer_state = outer.state();
    return history;
}

MetaHistory fomaml_train(forecast::GradientModel& model, std::span<const MetaTask> tasks, const MetaConfig& meta,
                         std::uint64_t seed) {
    std::vector<TaskBatch> batches;
    batches.reserve(tasks.size());
    for (const auto& t : tasks) batches.push_back(to_task_batch(t));
    return fomaml_train(model, std::span<const TaskBatch>(batches), meta, seed);
}

}  // namespace marketfc::train
