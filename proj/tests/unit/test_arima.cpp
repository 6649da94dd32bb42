#include "marketfc/forecast/arima.hpp"
#include "marketfc/rng.hpp"

#include "arma_sim.hpp"
#include "test_util.hpp"

#include <cmath>

namespace marketfc::forecast {
namespace {

using testing::simulate_arma;

TEST(Difference, Examples) {
    EXPECT_EQ(difference(std::vector<double>{1, 2, 3, 4}, 1), (std::vector<double>{1, 1, 1}));
    const std::vector<double> s{3, -1, 4, 1, 5};
    EXPECT_EQ(difference(s, 0), s);
    EXPECT_EQ(difference(std::vector<double>{1, 2, 4, 7}, 2), (std::vector<double>{1, 1}));
    EXPECT_EQ(difference(std::vector<double>{1, 2, 4, 7}, 2), difference(difference(std::vector<double>{1, 2, 4, 7}, 1), 1));
    EXPECT_ERROR_CODE(difference(std::vector<double>{1, 2}, 2), series_too_short);
}

TEST(ArimaOrder, Formatting) {
    EXPECT_EQ((ArimaOrder{2, 1, 0}.to_string()), "(2,1,0)");
    EXPECT_EQ(order_grid().size(), 47u);
    EXPECT_EQ(order_grid(1, 0, 1).size(), 3u);
}

TEST(ArimaFit, RecoversAr1) {
    const auto y = simulate_arma(1, 2000, {0.7}, {});
    const auto m = arima_fit(y, {1, 0, 0});
    ASSERT_TRUE(m.fitted);
    EXPECT_GE(m.ar_coeffs[0], 0.6);
    EXPECT_LE(m.ar_coeffs[0], 0.8);
}

TEST(ArimaFit, WhiteNoiseHasSmallAr) {
    const auto y = simulate_arma(2, 2000, {}, {});
    const auto m = arima_fit(y, {1, 0, 0});
    EXPECT_LT(std::abs(m.ar_coeffs[0]), 0.1);
}

TEST(ArimaFit, RecoversMa1) {
    const auto y = simulate_arma(3, 2000, {}, {0.5});
    const auto m = arima_fit(y, {0, 0, 1});
    EXPECT_NEAR(m.ma_coeffs[0], 0.5, 0.08);
}

TEST(ArimaFit, AicMatchesDefinition) {
    const auto y = simulate_arma(4, 500, {0.3}, {});
    const auto m = arima_fit(y, {1, 0, 1});
    const double n = static_cast<double>(m.n_obs);
    EXPECT_DOUBLE_EQ(m.aic(), n * std::log(m.sse / n) + 2.0 * 3.0);
}

TEST(ArimaFit, LineContinuesExactly) {
    std::vector<double> line;
    for (int i = 0; i < 50; ++i) line.push_back(2.0 + 0.5 * i);
    const auto m = arima_fit(line, {0, 1, 0});
    const auto f = arima_forecast(m, line, 5);
    for (int h = 0; h < 5; ++h) EXPECT_NEAR(f[h], 2.0 + 0.5 * (50 + h), 1e-9);
}

TEST(ArimaFit, ExplosiveFitIsShrunkToStationary) {
    std::vector<double> y{1.0};
    for (int i = 1; i < 200; ++i) y.push_back(y.back() * 1.05 + 0.01 * std::sin(i));
    const auto m = arima_fit(y, {1, 0, 0});
    EXPECT_TRUE(is_stationary(m.ar_coeffs));
    EXPECT_GT(m.shrink_count, 0u);
}

TEST(ArimaFit, Errors) {
    EXPECT_ERROR_CODE(arima_fit(std::vector<double>(15, 1.0), {2, 0, 1}), insufficient_history);
}

TEST(ArimaForecast, RandomWalkCarriesLastValue) {
    ArimaModel m;
    m.order = {0, 1, 0};
    m.fitted = true;
    const auto f = arima_forecast(m, std::vector<double>{5, 5, 5}, 4);
    EXPECT_EQ(f, (std::vector<double>{5, 5, 5, 5}));
}

TEST(ArimaForecast, DriftAccumulates) {
    ArimaModel m;
    m.order = {0, 1, 0};
    m.intercept = 0.25;
    m.fitted = true;
    const auto f = arima_forecast(m, std::vector<double>{1, 2, 3}, 3);
    EXPECT_DOUBLE_EQ(f[0], 3.25);
    EXPECT_DOUBLE_EQ(f[1], 3.5);
    EXPECT_DOUBLE_EQ(f[2], 3.75);
}

TEST(ArimaForecast, Ar1GeometricDecay) {
    ArimaModel m;
    m.order = {1, 0, 0};
    m.ar_coeffs = {0.5};
    m.fitted = true;
    const auto f = arima_forecast(m, std::vector<double>{0, 2, 8}, 4);
    EXPECT_EQ(f, (std::vector<double>{4, 2, 1, 0.5}));
}

TEST(ArimaForecast, UnfittedModel) {
    ArimaModel m;
    EXPECT_ERROR_CODE(arima_forecast(m, std::vector<double>{1, 2, 3}, 2), unfitted_model);
}

TEST(ArimaSelect, SingletonGrid) {
    const auto y = simulate_arma(5, 300, {0.5}, {});
    const std::vector<ArimaOrder> grid{{0, 1, 1}};
    EXPECT_EQ(arima_select_order(y, grid), (ArimaOrder{0, 1, 1}));
}

// With an intercept in both candidates the AIC comparison on a random walk is
// a unit-root test: AR(1) wins when the Dickey-Fuller tau_mu statistic has
// tau^2 > 2, which happens with probability ~0.55. The selected frequency of
// (0,1,0) must therefore sit near 0.45, not above one half.
TEST(ArimaSelect, RandomWalkSelectionFollowsUnitRootTheory) {
    const std::vector<ArimaOrder> grid{{0, 1, 0}, {1, 0, 0}};
    int hits = 0;
    const int trials = 200;
    for (int seed = 0; seed < trials; ++seed) {
        Rng rng(5000 + static_cast<std::uint64_t>(seed));
        std::vector<double> walk(500);
        double acc = 0.0;
        for (double& v : walk) v = (acc += rng.normal());
        if (arima_select_order(walk, grid) == ArimaOrder{0, 1, 0}) ++hits;
    }
    const double frac = static_cast<double>(hits) / trials;
    EXPECT_GT(frac, 0.35);
    EXPECT_LT(frac, 0.55);
}

TEST(ArimaSelect, PooledHistories) {
    std::vector<std::vector<double>> histories;
    for (std::uint64_t seed = 0; seed < 4; ++seed) histories.push_back(simulate_arma(seed, 400, {0.6, -0.3}, {}));
    const std::vector<ArimaOrder> grid{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    EXPECT_EQ(arima_select_order(histories, grid), (ArimaOrder{2, 0, 0}));
}

TEST(IsStationary, Examples) {
    EXPECT_TRUE(is_stationary(std::vector<double>{0.5}));
    EXPECT_FALSE(is_stationary(std::vector<double>{1.0}));
    EXPECT_TRUE(is_stationary(std::vector<double>{0.6, -0.3}));
    EXPECT_FALSE(is_stationary(std::vector<double>{0.6, 0.5}));
    EXPECT_TRUE(is_stationary(std::vector<double>{}));
}

}  // namespace
}  // namespace marketfc::forecast
