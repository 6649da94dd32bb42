#pragma once

#include "marketfc/forecast/mlp.hpp"
#include "marketfc/forecast/optimizer.hpp"

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace marketfc::forecast {

/// Self-describing JSON snapshot of a trained MLP.
struct MlpCheckpoint {
    MlpModel model{{1, 1}, Activation::relu};
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 0.0;
    AdamState optimizer_state;
    std::string config_hash;
};

nlohmann::json to_json(const MlpCheckpoint& checkpoint);
MlpCheckpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const MlpCheckpoint& checkpoint, const std::filesystem::path& path);
MlpCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace marketfc::forecast
