#pragma once

// Flat `key = value` configuration shared by every CLI command. Unknown keys
// are rejected; a missing file means defaults.

#include "devoc/nn.hpp"
#include "devoc/pipeline.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace devoc {

struct Config {
    PipelineConfig pipeline;
    TrainConfig train;
};

Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

/// Every key with its current value, in a form parse_config accepts.
std::string render_config(const Config& cfg);

} // namespace devoc
