#include "marketfc/forecast/checkpoint.hpp"

#include "marketfc/error.hpp"

#include <fstream>

namespace marketfc::forecast {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const MlpCheckpoint& checkpoint) {
    const auto& m = checkpoint.model;
    return nlohmann::json{
        {"format", "marketfc-mlp-checkpoint/1"},
        {"config_hash", checkpoint.config_hash},
        {"layer_sizes", m.layer_sizes()},
        {"activation", to_string(m.activation())},
        {"parameters", to_vector(m.parameters())},
        {"optimizer",
         {{"kind", to_string(checkpoint.optimizer)},
          {"learning_rate", checkpoint.learning_rate},
          {"step", checkpoint.optimizer_state.step},
          {"first_moment", to_vector(checkpoint.optimizer_state.first_moment)},
          {"second_moment", to_vector(checkpoint.optimizer_state.second_moment)}}},
    };
}

MlpCheckpoint checkpoint_from_json(const nlohmann::json& doc) {
    try {
        MlpCheckpoint cp;
        cp.model = MlpModel(doc.at("layer_sizes").get<std::vector<std::size_t>>(),
                            parse_activation(doc.at("activation").get<std::string>()));
        cp.model.set_parameters(from_vector(doc.at("parameters").get<std::vector<double>>()));
        cp.config_hash = doc.at("config_hash").get<std::string>();
        const auto& opt = doc.at("optimizer");
        cp.optimizer = opt.at("kind").get<std::string>() == "adam" ? OptimizerKind::adam : OptimizerKind::sgd;
        cp.learning_rate = opt.at("learning_rate").get<double>();
        cp.optimizer_state.step = opt.at("step").get<std::size_t>();
        cp.optimizer_state.first_moment = from_vector(opt.at("first_moment").get<std::vector<double>>());
        cp.optimizer_state.second_moment = from_vector(opt.at("second_moment").get<std::vector<double>>());
        return cp;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const MlpCheckpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write checkpoint " + path.string());
    out << to_json(checkpoint).dump() << "\n";
}

MlpCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::file_not_found, "cannot open checkpoint " + path.string());
    try {
        return checkpoint_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed checkpoint: ") + e.what());
    }
}

}  // namespace marketfc::forecast
