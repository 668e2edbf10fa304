#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "agentorg/backend.hpp"

namespace agentorg {

inline constexpr const char* prompt_template_version = "v1";

// Plain-text template with {name} placeholders.
class PromptTemplate {
public:
    PromptTemplate() = default;
    PromptTemplate(std::string name, std::string text) : name_(std::move(name)), text_(std::move(text)) {}

    static PromptTemplate from_file(const std::filesystem::path& path);
    static PromptTemplate embedded(const std::string& asset_name);

    const std::string& name() const noexcept { return name_; }
    const std::string& text() const noexcept { return text_; }
    std::set<std::string> placeholders() const;

    // Throws config_error if a placeholder in the text has no value.
    std::string render(const std::map<std::string, std::string>& values) const;

private:
    std::string name_;
    std::string text_;
};

// One template per call kind plus the system preamble and the judge rubric.
struct PromptSet {
    PromptTemplate system;
    PromptTemplate plan;
    PromptTemplate work;
    PromptTemplate sequential;
    PromptTemplate intention;
    PromptTemplate final_decision;
    PromptTemplate shared;
    PromptTemplate judge_rubric;
    std::string version = prompt_template_version;

    static PromptSet builtin();
    // Loads <dir>/<name>.txt for every template; missing files fall back to the built-in text.
    static PromptSet from_directory(const std::filesystem::path& dir, std::string version);

    const PromptTemplate& for_kind(CallKind kind) const;
};

// Placeholder values derived from one request.
std::map<std::string, std::string> prompt_values(const AgentRequest& request);

std::string format_outputs(const std::vector<TurnOutput>& outputs);
std::string format_intentions(const std::vector<Intention>& intentions);
std::string format_memory(const OrgMemory& memory);
std::string format_directive(const Directive& directive);

}  // namespace agentorg
