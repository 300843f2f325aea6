#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dage/geometry.hpp"
#include "json.hpp"

namespace dage {

struct ModelFile {
  ModelParams model;
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
  nlohmann::ordered_json config;  // echo of the training configuration
};

// "DAGE1", u64 little-endian header length, JSON header, then every
// parameter as little-endian float64 in ModelParams::parameters() order.
void save_model(ModelParams& model, const std::vector<std::string>& entity_names,
                const std::vector<std::string>& relation_names, const nlohmann::ordered_json& config,
                const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);  // IoError, FormatError

}  // namespace dage
