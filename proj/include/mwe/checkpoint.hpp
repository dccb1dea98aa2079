#pragma once

#include "mwe/model.hpp"

#include <json.hpp>

#include <string>

namespace mwe {

inline constexpr const char* kCheckpointFormat = "mwe-tagger-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// JSON document holding config, vocabulary, tagset, languages and every
/// parameter tensor. Doubles are written in shortest round-trip form, so a
/// reloaded model predicts bit-for-bit like the original.
std::string checkpoint_to_string(const Model& model);
Model checkpoint_from_string(const std::string& text);

/// Every ModelConfig field; from_json requires all of them.
nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace mwe
