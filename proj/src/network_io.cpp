#include "drpinns/network_io.hpp"

#include <fstream>

namespace drpinns {

nlohmann::json checkpoint_json(const Network& params) {
  nlohmann::json j;
  j["layer_sizes"] = params.layer_sizes;
  j["activation"] = std::string(to_string(params.activation));
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(params.weights[l].size()));
    for (Eigen::Index i = 0; i < params.weights[l].rows(); ++i)
      for (Eigen::Index k = 0; k < params.weights[l].cols(); ++k) w.push_back(params.weights[l](i, k));
    weights.push_back(std::move(w));
    biases.push_back(std::vector<double>(params.biases[l].begin(), params.biases[l].end()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Network network_from_json(const nlohmann::json& j) {
  try {
    Network params;
    params.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    validate_architecture(params.layer_sizes);
    params.activation = parse_activation(j.at("activation").get<std::string>());
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    const std::size_t layers = params.layer_sizes.size() - 1;
    if (weights.size() != layers || biases.size() != layers)
      throw ShapeError("checkpoint layer count does not match layer_sizes");
    for (std::size_t l = 0; l < layers; ++l) {
      const int rows = params.layer_sizes[l + 1];
      const int cols = params.layer_sizes[l];
      const auto w = weights[l].get<std::vector<double>>();
      const auto b = biases[l].get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(rows * cols) || b.size() != static_cast<std::size_t>(rows))
        throw ShapeError("checkpoint layer " + std::to_string(l) + " has the wrong number of entries");
      params.weights.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), rows, cols));
      params.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
    }
    if (!params.all_finite()) throw ConfigError("checkpoint contains non-finite parameters");
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Network& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << checkpoint_json(params).dump(2) << '\n';
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
  return network_from_json(j);
}

}  // namespace drpinns
