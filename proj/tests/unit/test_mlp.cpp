#include "marketfc/forecast/checkpoint.hpp"
#include "marketfc/forecast/forecaster.hpp"
#include "marketfc/forecast/mlp.hpp"
#include "marketfc/forecast/optimizer.hpp"
#include "marketfc/rng.hpp"

#include "gradcheck.hpp"
#include "test_util.hpp"

#include <filesystem>

namespace marketfc::forecast {
namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

TEST(Mlp, Shapes) {
    const auto m = MlpModel::init({20, 64, 10}, Activation::relu, 1);
    EXPECT_EQ(m.layer_count(), 2u);
    EXPECT_EQ(m.weight(0).rows(), 20);
    EXPECT_EQ(m.weight(0).cols(), 64);
    EXPECT_EQ(m.weight(1).rows(), 64);
    EXPECT_EQ(m.weight(1).cols(), 10);
    EXPECT_EQ(m.bias(1).size(), 10);
    EXPECT_EQ(m.parameters().size(), 20 * 64 + 64 + 64 * 10 + 10);
    EXPECT_ERROR_CODE(MlpModel({5}, Activation::relu), invalid_argument);
    EXPECT_ERROR_CODE(MlpModel({5, 0, 2}, Activation::relu), invalid_argument);
}

TEST(Mlp, InitDeterminismAndScale) {
    const auto a = MlpModel::init({8, 16, 3}, Activation::tanh, 5);
    const auto b = MlpModel::init({8, 16, 3}, Activation::tanh, 5);
    const auto c = MlpModel::init({8, 16, 3}, Activation::tanh, 6);
    EXPECT_EQ(a.parameters(), b.parameters());
    EXPECT_NE(a.parameters(), c.parameters());
    EXPECT_LE(a.weight(0).cwiseAbs().maxCoeff(), 1.0 / std::sqrt(8.0));
    EXPECT_LE(a.weight(1).cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
    EXPECT_EQ(a.bias(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, ZeroNetworkOutputsZero) {
    const MlpModel m({4, 7, 3}, Activation::relu);
    Rng rng(1);
    EXPECT_EQ(m.forward(random_matrix(5, 4, rng)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, BatchRowsAreIndependent) {
    const auto m = MlpModel::init({4, 9, 2}, Activation::tanh, 2);
    Rng rng(2);
    const Eigen::MatrixXd x = random_matrix(3, 4, rng);
    const Eigen::MatrixXd all = m.forward(x);
    for (Eigen::Index r = 0; r < 3; ++r) {
        const Eigen::MatrixXd row = m.forward(x.row(r));
        EXPECT_EQ(row, all.row(r));
    }
    EXPECT_EQ(m.forward(x), all);
    EXPECT_ERROR_CODE((void)m.forward(random_matrix(2, 5, rng)), shape_mismatch);
}

TEST(Mlp, PerfectFitHasZeroLossAndGradient) {
    const auto m = MlpModel::init({3, 5, 2}, Activation::relu, 3);
    Rng rng(3);
    const Eigen::MatrixXd x = random_matrix(4, 3, rng);
    const auto lg = m.loss_and_gradients(x, m.forward(x));
    EXPECT_EQ(lg.loss, 0.0);
    EXPECT_EQ(lg.gradients.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, LinearLayerClosedFormGradient) {
    auto m = MlpModel::init({3, 2}, Activation::relu, 4);
    Eigen::MatrixXd x(1, 3);
    x << 0.5, -1.0, 2.0;
    Eigen::MatrixXd y(1, 2);
    y << 0.3, -0.7;
    const Eigen::MatrixXd yhat = m.forward(x);
    const Eigen::RowVectorXd resid = (yhat - y).row(0);
    const Eigen::MatrixXd grad_w = 2.0 * x.transpose() * resid / 2.0;  // H = 2
    const Eigen::VectorXd grad_b = 2.0 * resid.transpose() / 2.0;
    const auto lg = m.loss_and_gradients(x, y);
    const Eigen::Map<const Eigen::MatrixXd> gw(lg.gradients.data(), 3, 2);
    const Eigen::Map<const Eigen::VectorXd> gb(lg.gradients.data() + 6, 2);
    EXPECT_LE((gw - grad_w).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((gb - grad_b).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_DOUBLE_EQ(lg.loss, mse(yhat, y));
}

TEST(Mlp, FiniteDifferenceAgreement) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Activation act = seed % 2 == 0 ? Activation::tanh : Activation::relu;
        const auto m = MlpModel::init({4, 6, 5, 3}, act, seed);
        Rng rng(seed + 100);
        const Eigen::MatrixXd x = random_matrix(5, 4, rng);
        const Eigen::MatrixXd y = random_matrix(5, 3, rng);
        EXPECT_LE(testing::gradient_check_error(m, x, y), 1e-4) << "seed " << seed;
    }
}

TEST(Mlp, SetParametersValidatesLength) {
    MlpModel m({2, 2}, Activation::relu);
    EXPECT_ERROR_CODE(m.set_parameters(Eigen::VectorXd::Zero(5)), shape_mismatch);
    const auto c = m.clone();
    EXPECT_EQ(c->parameters(), m.parameters());
}

TEST(Mlp, ActivationNames) {
    EXPECT_EQ(parse_activation(to_string(Activation::tanh)), Activation::tanh);
    EXPECT_ERROR_CODE(parse_activation("gelu"), invalid_argument);
}

TEST(Optimizer, SgdSteps) {
    Optimizer sgd(OptimizerKind::sgd, 0.1);
    Eigen::VectorXd p(3);
    p << 1.0, -2.0, 0.5;
    const Eigen::VectorXd before = p;
    sgd.step(p, Eigen::VectorXd::Zero(3));
    EXPECT_EQ(p, before);
    Eigen::VectorXd g(3);
    g << 0.5, 1.0, -3.0;
    sgd.step(p, g);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(p[i], before[i] - 0.1 * g[i]);
}

TEST(Optimizer, AdamFirstStepIsSignTimesLr) {
    Optimizer adam(OptimizerKind::adam, 0.01);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 3.0, -0.2;
    adam.step(p, g);
    EXPECT_NEAR(p[0], -0.01, 1e-9);
    EXPECT_NEAR(p[1], 0.01, 1e-9);
    EXPECT_EQ(adam.state().step, 1u);
    EXPECT_ERROR_CODE(adam.step(p, Eigen::VectorXd::Zero(3)), shape_mismatch);
}

TEST(Forecasters, PersistenceRepeatsLast) {
    const PersistenceForecaster f;
    const std::vector<double> lb{1, 2, 3};
    const auto out = f.predict(ForecastContext{lb, lb, {}}, 4);
    EXPECT_EQ(out, (std::vector<double>(4, 3.0)));
}

TEST(Forecasters, MlpHorizonMismatch) {
    const MlpForecaster f(MlpModel({3, 10}, Activation::relu));
    const std::vector<double> lb{0, 0, 0};
    EXPECT_EQ(f.predict(ForecastContext{lb, lb, {}}, 10).size(), 10u);
    EXPECT_ERROR_CODE((void)f.predict(ForecastContext{lb, lb, {}}, 5), horizon_mismatch);
    EXPECT_TRUE(f.is_deep());
}

TEST(Checkpoint, RoundTrip) {
    MlpCheckpoint ck;
    ck.model = MlpModel::init({5, 4, 10}, Activation::tanh, 9);
    ck.learning_rate = 1e-3;
    ck.config_hash = "0123456789abcdef";
    Optimizer adam(OptimizerKind::adam, 1e-3);
    Eigen::VectorXd p = ck.model.parameters();
    adam.step(p, Eigen::VectorXd::Constant(p.size(), 0.1));
    ck.optimizer_state = adam.state();
    const auto path = std::filesystem::temp_directory_path() / "marketfc_ckpt.json";
    save_checkpoint(ck, path);
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back.model.layer_sizes(), ck.model.layer_sizes());
    EXPECT_EQ(back.model.activation(), Activation::tanh);
    EXPECT_EQ(back.model.parameters(), ck.model.parameters());
    EXPECT_EQ(back.optimizer_state.first_moment, ck.optimizer_state.first_moment);
    EXPECT_EQ(back.optimizer_state.step, 1u);
    EXPECT_EQ(back.config_hash, ck.config_hash);
    EXPECT_ERROR_CODE(load_checkpoint("/nonexistent/ck.json"), file_not_found);
}

}  // namespace
}  // namespace marketfc::forecast
