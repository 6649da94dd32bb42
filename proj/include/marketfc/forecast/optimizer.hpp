#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace marketfc::forecast {

enum class OptimizerKind { sgd, adam };

std::string to_string(OptimizerKind kind);

struct AdamState {
    Eigen::VectorXd first_moment;
    Eigen::VectorXd second_moment;
    std::size_t step = 0;
};

/// In-place first-order update of a flat parameter vector. Adam uses
/// beta1 = 0.9, beta2 = 0.999, eps = 1e-8 with bias correction.
class Optimizer {
public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    Optimizer(OptimizerKind kind, double lr);

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& gradients);

    [[nodiscard]] OptimizerKind kind() const noexcept { return kind_; }
    [[nodiscard]] double learning_rate() const noexcept { return lr_; }
    [[nodiscard]] const AdamState& state() const noexcept { return adam_; }
    void set_state(AdamState state) { adam_ = std::move(state); }

private:
    OptimizerKind kind_;
    double lr_;
    AdamState adam_;
};

}  // namespace marketfc::forecast
