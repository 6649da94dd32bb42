#include "marketfc/forecast/mlp.hpp"

#include "marketfc/error.hpp"
#include "marketfc/rng.hpp"

#include <cmath>

namespace marketfc::forecast {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation activation) {
    if (activation == Activation::relu) return z.cwiseMax(0.0);
    return z.array().tanh().matrix();
}

// Derivative expressed through the pre-activation z and activation a.
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& a, Activation activation) {
    if (activation == Activation::relu) return (z.array() > 0.0).cast<double>().matrix();
    return (1.0 - a.array().square()).matrix();
}

}  // namespace

std::string to_string(Activation activation) {
    return activation == Activation::relu ? "relu" : "tanh";
}

Activation parse_activation(const std::string& text) {
    if (text == "relu") return Activation::relu;
    if (text == "tanh") return Activation::tanh;
    throw Error(ErrorCode::invalid_argument, "unknown activation '" + text + "'");
}

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes, Activation activation)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
    if (sizes_.size() < 2) throw Error(ErrorCode::invalid_argument, "MLP needs at least input and output sizes");
    for (std::size_t s : sizes_) {
        if (s == 0) throw Error(ErrorCode::invalid_argument, "MLP layer sizes must be positive");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(total);
        total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

MlpModel MlpModel::init(std::vector<std::size_t> layer_sizes, Activation activation, std::uint64_t seed) {
    MlpModel model(std::move(layer_sizes), activation);
    Rng rng(seed);
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const std::size_t fan_in = model.sizes_[l];
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        const auto start = static_cast<Eigen::Index>(model.offsets_[l]);
        const auto count = static_cast<Eigen::Index>(fan_in * model.sizes_[l + 1]);
        for (Eigen::Index i = 0; i < count; ++i) model.params_(start + i) = scale * (2.0 * rng.uniform() - 1.0);
    }
    return model;
}

Eigen::Map<const Eigen::MatrixXd> MlpModel::weight(std::size_t layer) const {
    return {params_.data() + offsets_.at(layer), static_cast<Eigen::Index>(sizes_[layer]),
            static_cast<Eigen::Index>(sizes_[layer + 1])};
}

Eigen::Map<const Eigen::VectorXd> MlpModel::bias(std::size_t layer) const {
    return {params_.data() + offsets_.at(layer) + sizes_[layer] * sizes_[layer + 1],
            static_cast<Eigen::Index>(sizes_[layer + 1])};
}

void MlpModel::set_parameters(const Eigen::VectorXd& params) {
    if (params.size() != params_.size()) {
        throw Error(ErrorCode::shape_mismatch, "parameter vector has wrong length");
    }
    params_ = params;
}

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& inputs) const {
    if (inputs.cols() != static_cast<Eigen::Index>(input_size())) {
        throw Error(ErrorCode::shape_mismatch, "MLP input width " + std::to_string(inputs.cols()) +
                                                   " does not match input size " + std::to_string(input_size()));
    }
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        Eigen::MatrixXd z = a * weight(l);
        z.rowwise() += bias(l).transpose();
        a = (l + 1 < layer_count()) ? activate(z, activation_) : std::move(z);
    }
    return a;
}

LossAndGradients MlpModel::loss_and_gradients(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) const {
    if (inputs.cols() != static_cast<Eigen::Index>(input_size()) ||
        targets.cols() != static_cast<Eigen::Index>(output_size()) || inputs.rows() != targets.rows() ||
        inputs.rows() == 0) {
        throw Error(ErrorCode::shape_mismatch, "MLP batch shapes do not agree with the model");
    }
    const std::size_t layers = layer_count();
    std::vector<Eigen::MatrixXd> pre(layers);
    std::vector<Eigen::MatrixXd> act(layers + 1);
    act[0] = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = act[l] * weight(l);
        pre[l].rowwise() += bias(l).transpose();
        act[l + 1] = (l + 1 < layers) ? activate(pre[l], activation_) : pre[l];
    }

    const Eigen::MatrixXd diff = act[layers] - targets;
    const double count = static_cast<double>(diff.size());
    LossAndGradients out;
    out.loss = diff.squaredNorm() / count;
    out.gradients = Eigen::VectorXd::Zero(params_.size());

    Eigen::MatrixXd delta = (2.0 / count) * diff;  // dLoss/dz for the output layer
    for (std::size_t l = layers; l-- > 0;) {
        const auto rows = static_cast<Eigen::Index>(sizes_[l]);
        const auto cols = static_cast<Eigen::Index>(sizes_[l + 1]);
        Eigen::Map<Eigen::MatrixXd> grad_w(out.gradients.data() + offsets_[l], rows, cols);
        Eigen::Map<Eigen::VectorXd> grad_b(out.gradients.data() + offsets_[l] + sizes_[l] * sizes_[l + 1], cols);
        grad_w.noalias() = act[l].transpose() * delta;
        grad_b = delta.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd upstream = delta * weight(l).transpose();
            delta = upstream.cwiseProduct(activation_grad(pre[l - 1], act[l], activation_));
        }
    }
    return out;
}

std::unique_ptr<GradientModel> MlpModel::clone() const {
    return std::make_unique<MlpModel>(*this);
}

double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw Error(ErrorCode::shape_mismatch, "prediction and target shapes differ");
    }
    if (predictions.size() == 0) throw Error(ErrorCode::empty_input, "empty batch");
    return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

}  // namespace marketfc::forecast
