#pragma once

#include "shelfscan/pipeline.hpp"

#include <filesystem>
#include <string>

namespace shelfscan {

/// Parses a run configuration. Every section and key is optional and falls
/// back to its default; unknown keys, wrong types and out-of-range values
/// raise ConfigError. Keys starting with '#' are comments and are skipped.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full effective configuration; parsing the output yields an equal config.
std::string run_config_to_json(const RunConfig& cfg, int indent = 2);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace shelfscan
