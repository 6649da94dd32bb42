#include "marketfc/forecast/optimizer.hpp"

#include "marketfc/error.hpp"

#include <cmath>

namespace marketfc::forecast {

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::adam ? "adam" : "sgd";
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error(ErrorCode::invalid_argument, "learning rate must be >= 0");
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& gradients) {
    if (params.size() != gradients.size()) {
        throw Error(ErrorCode::shape_mismatch, "gradient size does not match parameter size");
    }
    if (kind_ == OptimizerKind::sgd) {
        params -= lr_ * gradients;
        return;
    }
    if (adam_.first_moment.size() != params.size()) {
        adam_.first_moment = Eigen::VectorXd::Zero(params.size());
        adam_.second_moment = Eigen::VectorXd::Zero(params.size());
        adam_.step = 0;
    }
    ++adam_.step;
    adam_.first_moment = kBeta1 * adam_.first_moment + (1.0 - kBeta1) * gradients;
    adam_.second_moment = kBeta2 * adam_.second_moment + (1.0 - kBeta2) * gradients.cwiseProduct(gradients);
    const double t = static_cast<double>(adam_.step);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    params.array() -= lr_ * (adam_.first_moment.array() / c1) /
                      ((adam_.second_moment.array() / c2).sqrt() + kEpsilon);
}

}  // namespace marketfc::forecast
