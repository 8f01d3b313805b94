#pragma once

#include "drpinns/network.hpp"

#include <json.hpp>

#include <filesystem>

namespace drpinns {

/// {"layer_sizes": [...], "activation": "tanh", "weights": [[row-major]...], "biases": [[...]...]}
nlohmann::json checkpoint_json(const Network& params);
Network network_from_json(const nlohmann::json& j);

void save_checkpoint(const Network& params, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace drpinns
