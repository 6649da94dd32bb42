#pragma once

#include "marketfc/data.hpp"
#include "marketfc/forecast/arima.hpp"
#include "marketfc/forecast/mlp.hpp"
#include "marketfc/simgen.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace marketfc::forecast {

/// Which scale a forecaster consumes and emits. Normalized forecasters see the
/// z-scored lookback and their output is de-normalized by the caller.
enum class InputScale { raw, normalized };

struct ForecastContext {
    std::span<const double> history;   // raw values strictly before the origin
    std::span<const double> lookback;  // last L values, on the forecaster's input scale
    data::NormStats stats;             // lookback statistics
};

class Forecaster {
public:
    virtual ~Forecaster() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual InputScale input_scale() const = 0;
    /// Deep-learning models are pooled in the report's "average DL" column.
    [[nodiscard]] virtual bool is_deep() const { return false; }
    /// Returns exactly `horizon` values; deterministic for a given state and input.
    [[nodiscard]] virtual std::vector<double> predict(const ForecastContext& context, std::size_t horizon) const = 0;
};

/// Repeats the last observed value.
class PersistenceForecaster final : public Forecaster {
public:
    [[nodiscard]] std::string name() const override { return "persistence"; }
    [[nodiscard]] InputScale input_scale() const override { return InputScale::raw; }
    [[nodiscard]] std::vector<double> predict(const ForecastContext& context, std::size_t horizon) const override;
};

/// Refits a fixed ARIMA order on the full trailing raw history at every call.
class ArimaForecaster final : public Forecaster {
public:
    explicit ArimaForecaster(ArimaOrder order) : order_(order) {}

    [[nodiscard]] std::string name() const override { return "arima"; }
    [[nodiscard]] InputScale input_scale() const override { return InputScale::raw; }
    [[nodiscard]] std::vector<double> predict(const ForecastContext& context, std::size_t horizon) const override;
    [[nodiscard]] const ArimaOrder& order() const noexcept { return order_; }

private:
    ArimaOrder order_;
};

/// Direct multi-horizon MLP on the normalized lookback.
class MlpForecaster final : public Forecaster {
public:
    explicit MlpForecaster(MlpModel model) : model_(std::move(model)) {}

    [[nodiscard]] std::string name() const override { return "mlp"; }
    [[nodiscard]] InputScale input_scale() const override { return InputScale::normalized; }
    [[nodiscard]] bool is_deep() const override { return true; }
    [[nodiscard]] std::vector<double> predict(const ForecastContext& context, std::size_t horizon) const override;
    [[nodiscard]] const MlpModel& model() const noexcept { return model_; }

private:
    MlpModel model_;
};

/// Replays the synthetic generator's deterministic transition from the
/// lookback. It receives the normalized lookback like a deep model, undoes the
/// normalization with the supplied statistics, rolls the dynamics forward and
/// re-normalizes its output, so every scaling step of the pipeline is exercised.
class TransitionOracleForecaster final : public Forecaster {
public:
    explicit TransitionOracleForecaster(simgen::GeneratorConfig config) : config_(std::move(config)) {}

    [[nodiscard]] std::string name() const override { return "oracle"; }
    [[nodiscard]] InputScale input_scale() const override { return InputScale::normalized; }
    [[nodiscard]] std::vector<double> predict(const ForecastContext& context, std::size_t horizon) const override;

private:
    simgen::GeneratorConfig config_;
};

}  // namespace marketfc::forecast
