#include "marketfc/forecast/forecaster.hpp"

#include "marketfc/error.hpp"

namespace marketfc::forecast {

std::vector<double> PersistenceForecaster::predict(const ForecastContext& context, std::size_t horizon) const {
    if (context.lookback.empty()) throw Error(ErrorCode::invalid_argument, "persistence needs a lookback");
    return std::vector<double>(horizon, context.lookback.back());
}

std::vector<double> ArimaForecaster::predict(const ForecastContext& context, std::size_t horizon) const {
    const ArimaModel model = arima_fit(context.history, order_);
    return arima_forecast(model, context.history, horizon);
}

std::vector<double> MlpForecaster::predict(const ForecastContext& context, std::size_t horizon) const {
    if (horizon != model_.output_size()) {
        throw Error(ErrorCode::horizon_mismatch, "MLP was built for horizon " + std::to_string(model_.output_size()));
    }
    Eigen::MatrixXd input(1, static_cast<Eigen::Index>(context.lookback.size()));
    for (std::size_t i = 0; i < context.lookback.size(); ++i) input(0, static_cast<Eigen::Index>(i)) = context.lookback[i];
    const Eigen::MatrixXd out = model_.forward(input);
    return std::vector<double>(out.data(), out.data() + out.size());
}

std::vector<double> TransitionOracleForecaster::predict(const ForecastContext& context, std::size_t horizon) const {
    if (context.lookback.size() < config_.n) {
        throw Error(ErrorCode::invalid_argument, "oracle lookback must cover the long moving average");
    }
    std::vector<double> path = data::denormalize(context.lookback, context.stats);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = path.size() - 1;
        const double x = simgen::log_ma_ratio(path, config_.m, config_.n, t);
        path.push_back(simgen::step_price(path[t], simgen::excess_demand(config_.rules, x), config_.influence));
    }
    const std::span<const double> future(path.data() + context.lookback.size(), horizon);
    return data::normalize(future, context.stats);
}

}  // namespace marketfc::forecast
