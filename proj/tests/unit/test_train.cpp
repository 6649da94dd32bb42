#include "marketfc/train.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace marketfc::train {
namespace {

using forecast::Activation;
using forecast::MlpModel;

data::RawSeries noisy_sine(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    data::RawSeries s;
    s.id = "sine";
    for (std::size_t i = 0; i < n; ++i) {
        s.values.push_back(50.0 + 5.0 * std::sin(0.2 * static_cast<double>(i)) + 0.1 * rng.normal());
    }
    return s;
}

/// Windows whose single target is the mean of a random lookback.
data::WindowedDataset mean_dataset(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    data::WindowedDataset ds;
    ds.lookback_len = 4;
    ds.horizon = 1;
    for (std::size_t i = 0; i < count; ++i) {
        data::Window w;
        w.series_id = "toy";
        w.origin = i;
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
            w.lookback.push_back(10.0 + rng.normal());
            sum += w.lookback.back();
        }
        w.target = {sum / 4.0};
        ds.push_back(w);
    }
    return ds;
}

TEST(TrainNormal, ZeroEpochsLeavesModel) {
    auto model = MlpModel::init({4, 8, 1}, Activation::relu, 1);
    const auto before = model.parameters();
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto history = train_normal(model, mean_dataset(20, 1), cfg);
    EXPECT_EQ(model.parameters(), before);
    EXPECT_TRUE(history.epochs.empty());
}

TEST(TrainNormal, LearnsMeanOfLookback) {
    auto model = MlpModel::init({4, 16, 1}, Activation::tanh, 2);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch_size = 16;
    cfg.lr = 1e-2;
    const auto history = train_normal(model, mean_dataset(256, 2), cfg);
    ASSERT_EQ(history.epochs.size(), 50u);
    EXPECT_LE(history.epochs.back().train_loss, 0.5 * history.epochs.front().train_loss);
    EXPECT_EQ(history.total_updates, 50u * 16u);
}

TEST(TrainNormal, DeterministicAndRestoresBest) {
    const auto train_set = data::make_windows(noisy_sine(300, 3), 5, 10);
    const auto val_set = data::make_windows(noisy_sine(80, 4), 5, 10);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 9;
    cfg.patience = 3;
    auto a = MlpModel::init({5, 16, 10}, Activation::relu, 3);
    auto b = a;
    const auto ha = train_normal(a, train_set, cfg, &val_set);
    const auto hb = train_normal(b, train_set, cfg, &val_set);
    EXPECT_EQ(a.parameters(), b.parameters());
    ASSERT_GT(ha.best_epoch, 0u);
    EXPECT_DOUBLE_EQ(validation_rmse(a, val_set), ha.best_val_rmse);
    double min_val = INFINITY;
    for (const auto& e : ha.epochs) min_val = std::min(min_val, e.val_rmse);
    EXPECT_EQ(ha.best_val_rmse, min_val);
    EXPECT_EQ(ha.epochs.size(), hb.epochs.size());
}

TEST(TrainNormal, EmptyDataset) {
    auto model = MlpModel::init({4, 1}, Activation::relu, 1);
    data::WindowedDataset empty;
    EXPECT_ERROR_CODE(train_normal(model, empty, TrainConfig{}), empty_dataset);
}

TEST(AugmentationSchedule, EmptyEpoch) {
    Rng rng(1);
    const auto e = augmentation_schedule(0, 0, rng);
    EXPECT_TRUE(e.consumed.empty());
    EXPECT_EQ(e.draws, 0u);
}

TEST(AugmentationSchedule, ConsumesEveryBatchOnce) {
    Rng rng(2);
    for (int epoch = 0; epoch < 200; ++epoch) {
        const auto e = augmentation_schedule(3, 5, rng);
        ASSERT_EQ(e.consumed.size(), 8u);
        EXPECT_GE(e.draws, 8u);
        std::map<BatchSource, std::vector<std::size_t>> seen;
        for (const auto& b : e.consumed) seen[b.source].push_back(b.index);
        EXPECT_EQ(seen[BatchSource::synthetic], (std::vector<std::size_t>{0, 1, 2}));
        EXPECT_EQ(seen[BatchSource::real], (std::vector<std::size_t>{0, 1, 2, 3, 4}));
    }
}

TEST(AugmentationSchedule, FirstBatchIsBalanced) {
    Rng rng(3);
    int synthetic_first = 0;
    for (int epoch = 0; epoch < 1000; ++epoch) {
        if (augmentation_schedule(4, 4, rng).consumed.front().source == BatchSource::synthetic) ++synthetic_first;
    }
    EXPECT_NEAR(synthetic_first / 1000.0, 0.5, 0.05);
}

TEST(TrainAugmented, UpdateCountPerEpoch) {
    const auto real = data::make_windows(noisy_sine(5 + 10 + 4 * 32 - 1, 1), 5, 10);  // 128 windows
    const auto syn = data::make_windows(noisy_sine(5 + 10 + 3 * 32 - 1, 2), 5, 10);   // 96 windows
    auto model = MlpModel::init({5, 8, 10}, Activation::relu, 1);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 32;
    const auto out = train_augmented(model, real, syn, cfg);
    EXPECT_EQ(out.synthetic_batches, 3u);
    EXPECT_EQ(out.real_batches, 4u);
    ASSERT_EQ(out.history.epochs.size(), 4u);
    for (const auto& e : out.history.epochs) EXPECT_EQ(e.updates, 7u);
    EXPECT_EQ(out.history.total_updates, 28u);
}

TEST(TrainAugmented, EmptyLoadersDoNothing) {
    auto model = MlpModel::init({5, 10}, Activation::relu, 1);
    const auto before = model.parameters();
    data::WindowedDataset empty;
    TrainConfig cfg;
    cfg.epochs = 2;
    const auto out = train_augmented(model, empty, empty, cfg);
    EXPECT_EQ(out.history.total_updates, 0u);
    EXPECT_EQ(model.parameters(), before);
}

TEST(TrainAugmented, RejectsUninterpolatedSynthetic) {
    auto model = MlpModel::init({20, 10}, Activation::relu, 1);
    const auto real = data::make_windows(noisy_sine(60, 1), 20, 10);
    const auto syn = data::make_windows(noisy_sine(60, 2), 5, 10);
    EXPECT_ERROR_CODE(train_augmented(model, real, syn, TrainConfig{}), shape_mismatch);
}

TEST(MetaTasks, IndexConstraints) {
    const auto series = noisy_sine(500, 5);
    MetaConfig meta;
    const std::size_t L = 5;
    const std::size_t H = 10;
    const auto tasks = build_meta_tasks(series, L, H, 500, meta, 11);
    ASSERT_EQ(tasks.size(), 500u);
    for (const auto& t : tasks) {
        ASSERT_EQ(t.support.size(), meta.k);
        ASSERT_EQ(t.query.size(), meta.r);
        for (const auto& w : t.support.windows) {
            const std::size_t begin = w.origin - L;
            EXPECT_LE(begin + L + H, t.anchor);
            EXPECT_GE(begin + L + H + meta.a, t.anchor);
            EXPECT_EQ(w.lookback.size() + w.target.size(), L + H);
            EXPECT_EQ(w.lookback.front(), series.values[begin]);
            EXPECT_EQ(w.target.back(), series.values[begin + L + H - 1]);
        }
        for (const auto& w : t.query.windows) {
            const std::size_t begin = w.origin - L;
            EXPECT_GT(begin, t.anchor);
            EXPECT_LE(begin, t.anchor + meta.a);
            EXPECT_LE(begin + L + H, series.values.size());
        }
    }
}

TEST(MetaTasks, UnitOffsetBound) {
    MetaConfig meta;
    meta.a = 1;
    const auto tasks = build_meta_tasks(noisy_sine(200, 1), 5, 10, 50, meta, 2);
    for (const auto& t : tasks) {
        for (const auto& w : t.support.windows) EXPECT_EQ(w.origin - 5, t.anchor - 15 - 1);
        for (const auto& w : t.query.windows) EXPECT_EQ(w.origin - 5, t.anchor + 1);
    }
}

TEST(MetaTasks, Deterministic) {
    const auto s = noisy_sine(300, 1);
    const auto a = build_meta_tasks(s, 5, 10, 20, MetaConfig{}, 7);
    const auto b = build_meta_tasks(s, 5, 10, 20, MetaConfig{}, 7);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].anchor, b[i].anchor);
        EXPECT_EQ(a[i].support.windows[0].origin, b[i].support.windows[0].origin);
    }
}

TEST(MetaTasks, TooShort) {
    EXPECT_EQ(min_meta_series_length(5, 10, 50), 130u);
    EXPECT_ERROR_CODE(build_meta_tasks(noisy_sine(129, 1), 5, 10, 1, MetaConfig{}, 1), series_too_short);
    EXPECT_NO_THROW(build_meta_tasks(noisy_sine(130, 1), 5, 10, 1, MetaConfig{}, 1));
}

TEST(Adapt, ZeroStepsIsIdentityAndBaseUntouched) {
    const auto tasks = build_meta_tasks(noisy_sine(300, 2), 5, 10, 1, MetaConfig{}, 3);
    const auto model = MlpModel::init({5, 8, 10}, Activation::tanh, 4);
    MetaConfig meta;
    meta.inner_steps = 0;
    EXPECT_EQ(adapt(model, tasks[0], meta)->parameters(), model.parameters());
    meta.inner_steps = 5;
    const auto before = model.parameters();
    const auto first = adapt(model, tasks[0], meta);
    const auto second = adapt(model, tasks[0], meta);
    EXPECT_EQ(model.parameters(), before);
    EXPECT_EQ(first->parameters(), second->parameters());
    EXPECT_NE(first->parameters(), before);
}

TEST(Adapt, SmallStepsReduceSupportLoss) {
    const auto tasks = build_meta_tasks(noisy_sine(300, 3), 5, 10, 5, MetaConfig{}, 4);
    const auto model = MlpModel::init({5, 8, 10}, Activation::tanh, 5);
    MetaConfig meta;
    meta.inner_lr = 1e-3;
    for (const auto& t : tasks) {
        const auto b = to_task_batch(t);
        const double before = model.loss_and_gradients(b.support.inputs, b.support.targets).loss;
        const double after = adapt(model, b.support, meta)->loss_and_gradients(b.support.inputs, b.support.targets).loss;
        EXPECT_LE(after, before);
    }
}

TEST(Fomaml, ZeroMetaLrIsFixedPoint) {
    const auto tasks = build_meta_tasks(noisy_sine(300, 4), 5, 10, 10, MetaConfig{}, 5);
    auto model = MlpModel::init({5, 8, 10}, Activation::relu, 6);
    const auto before = model.parameters();
    MetaConfig meta;
    meta.meta_lr = 0.0;
    meta.meta_iterations = 20;
    const auto history = fomaml_train(model, std::span<const MetaTask>(tasks), meta, 1);
    EXPECT_EQ(model.parameters(), before);
    EXPECT_EQ(history.iterations.size(), 20u);
}

TEST(Fomaml, ZeroInnerStepsIsQueryGradientDescent) {
    const auto tasks = build_meta_tasks(noisy_sine(300, 5), 5, 10, 1, MetaConfig{}, 6);
    const auto batch = to_task_batch(tasks[0]);
    auto model = MlpModel::init({5, 8, 10}, Activation::tanh, 7);
    auto reference = model;
    MetaConfig meta;
    meta.inner_steps = 0;
    meta.meta_batch = 1;
    meta.meta_iterations = 3;
    meta.meta_lr = 0.05;
    meta.outer_optimizer = forecast::OptimizerKind::sgd;
    fomaml_train(model, std::span<const TaskBatch>(&batch, 1), meta, 1);
    for (int i = 0; i < 3; ++i) {
        const auto g = reference.loss_and_gradients(batch.query.inputs, batch.query.targets).gradients;
        reference.set_parameters(reference.parameters() - 0.05 * g);
    }
    EXPECT_LE((model.parameters() - reference.parameters()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fomaml, DeterministicGivenSeed) {
    const auto tasks = build_meta_tasks(noisy_sine(300, 6), 5, 10, 10, MetaConfig{}, 7);
    MetaConfig meta;
    meta.meta_iterations = 10;
    auto a = MlpModel::init({5, 8, 10}, Activation::relu, 8);
    auto b = a;
    fomaml_train(a, std::span<const MetaTask>(tasks), meta, 3);
    fomaml_train(b, std::span<const MetaTask>(tasks), meta, 3);
    EXPECT_EQ(a.parameters(), b.parameters());
}

TEST(Fomaml, DivergenceIsReported) {
    const auto tasks = build_meta_tasks(noisy_sine(300, 7), 5, 10, 4, MetaConfig{}, 8);
    auto model = MlpModel::init({5, 8, 10}, Activation::relu, 9);
    MetaConfig meta;
    meta.inner_lr = 1e6;
    meta.meta_iterations = 5;
    EXPECT_ERROR_CODE(fomaml_train(model, std::span<const MetaTask>(tasks), meta, 1), gradient_explosion);
}

TEST(Fomaml, EmptyTasks) {
    auto model = MlpModel::init({5, 10}, Activation::relu, 1);
    EXPECT_ERROR_CODE(fomaml_train(model, std::span<const TaskBatch>(), MetaConfig{}, 1), empty_dataset);
}

TEST(Regime, Names) {
    for (auto r : {Regime::normal, Regime::augmented, Regime::meta}) EXPECT_EQ(parse_regime(to_string(r)), r);
    EXPECT_ERROR_CODE(parse_regime("transfer"), invalid_argument);
}

}  // namespace
}  // namespace marketfc::train
