#pragma once

#include <span>
#include <string>
#include <string_view>

namespace agentorg {

// Files under assets/ compiled into the library (prompt templates, rubric, task corpus).
struct EmbeddedAsset {
    std::string_view name;  // path relative to assets/, e.g. "prompts/sequential.txt"
    std::string_view content;
};

std::span<const EmbeddedAsset> embedded_assets();

// Throws std::out_of_range if the asset is unknown.
std::string_view embedded_asset(std::string_view name);

}  // namespace agentorg
