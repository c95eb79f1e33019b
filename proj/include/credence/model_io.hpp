#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "credence/credence.hpp"

namespace credence {

inline constexpr int model_format_version = 1;

nlohmann::json model_to_json(const CredenceModel& model);

/// Throws DataError for unrecognized versions or inconsistent tensors.
CredenceModel model_from_json(const nlohmann::json& j);

/// Written with two-space indentation; save -> load -> save is byte-identical.
void save_model(const std::filesystem::path& path, const CredenceModel& model);
CredenceModel load_model(const std::filesystem::path& path);

} // namespace credence
