#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace marketfc::forecast {

struct LossAndGradients {
    double loss = 0.0;
    Eigen::VectorXd gradients;  // same layout as parameters()
};

/// Contract shared by everything the training regimes can optimize: a flat
/// parameter vector plus an MSE objective with its gradient.
class GradientModel {
public:
    virtual ~GradientModel() = default;

    [[nodiscard]] virtual const Eigen::VectorXd& parameters() const = 0;
    virtual void set_parameters(const Eigen::VectorXd& params) = 0;

    /// B x input_size -> B x output_size.
    [[nodiscard]] virtual Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const = 0;
    [[nodiscard]] virtual LossAndGradients loss_and_gradients(const Eigen::MatrixXd& inputs,
                                                              const Eigen::MatrixXd& targets) const = 0;
    [[nodiscard]] virtual std::unique_ptr<GradientModel> clone() const = 0;
};

enum class Activation { relu, tanh };

std::string to_string(Activation activation);
Activation parse_activation(const std::string& text);

/// Fully connected network, affine + activation on hidden layers and a purely
/// affine output layer producing all horizon steps at once.
///
/// Parameters live in one contiguous vector; layer l occupies
/// [W_l (in x out, column-major) | b_l (out)] in order.
class MlpModel final : public GradientModel {
public:
    /// All parameters zero. Throws invalid_argument unless there are at least
    /// two layers and every size is positive.
    MlpModel(std::vector<std::size_t> layer_sizes, Activation activation);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
    static MlpModel init(std::vector<std::size_t> layer_sizes, Activation activation, std::uint64_t seed);

    [[nodiscard]] const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    [[nodiscard]] Activation activation() const noexcept { return activation_; }
    [[nodiscard]] std::size_t input_size() const noexcept { return sizes_.front(); }
    [[nodiscard]] std::size_t output_size() const noexcept { return sizes_.back(); }
    [[nodiscard]] std::size_t layer_count() const noexcept { return sizes_.size() - 1; }

    [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

    [[nodiscard]] const Eigen::VectorXd& parameters() const override { return params_; }
    void set_parameters(const Eigen::VectorXd& params) override;

    [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const override;
    [[nodiscard]] LossAndGradients loss_and_gradients(const Eigen::MatrixXd& inputs,
                                                      const Eigen::MatrixXd& targets) const override;
    [[nodiscard]] std::unique_ptr<GradientModel> clone() const override;

private:
    std::vector<std::size_t> sizes_;
    Activation activation_;
    std::vector<std::size_t> offsets_;  // start of W_l for each layer
    Eigen::VectorXd params_;
};

/// Mean squared error over every entry.
double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

}  // namespace marketfc::forecast
