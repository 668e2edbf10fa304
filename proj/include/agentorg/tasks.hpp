#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "agentorg/core.hpp"

namespace agentorg {

// The bundled corpus (8 tasks per level), embedded in the library.
const std::vector<Task>& bundled_tasks();
std::string bundled_corpus_version();

// Accepts {"tasks": [...]} or a bare array. Every task is validated and task ids must be unique.
std::vector<Task> parse_tasks(const json& doc);
std::vector<Task> load_tasks(const std::filesystem::path& path);

// Keeps tasks of the given levels (all if empty), at most `per_level` of each (all if nullopt),
// preserving corpus order.
std::vector<Task> select_tasks(const std::vector<Task>& tasks, const std::vector<Level>& levels,
                               std::optional<std::size_t> per_level);

}  // namespace agentorg
