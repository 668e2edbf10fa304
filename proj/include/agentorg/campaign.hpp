#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentorg/backend.hpp"
#include "agentorg/core.hpp"
#include "agentorg/evaluation.hpp"
#include "agentorg/mock_backend.hpp"
#include "agentorg/remote.hpp"

namespace agentorg {

enum class BackendKind { mock, remote };

struct BackendConfig {
    std::string ref;
    BackendKind kind = BackendKind::mock;
    std::string model_id = "mock";  // remote: taken from `remote.model_id`
    MockAgentPolicy policy;
    std::chrono::milliseconds call_delay{0};
    std::optional<RemoteConfig> remote;
    std::optional<std::filesystem::path> replay_fixtures;  // serve remote calls from a fixture file
};

enum class JudgeKind { synthetic, backend, none };

struct JudgeConfig {
    JudgeKind kind = JudgeKind::synthetic;
    std::string backend_ref;     // kind == backend
    std::string policy_backend;  // kind == synthetic; defaults to the agents' backend
};

struct CampaignConfig {
    std::string campaign_id;
    std::vector<Protocol> protocols;
    std::vector<int> agent_counts;
    std::vector<Task> tasks;
    std::string corpus_label = "bundled";
    std::vector<std::uint64_t> seeds;
    std::vector<BackendConfig> backends;
    std::string agent_backend;
    std::string agent_model;  // empty: the backend's model id
    double agent_temperature = default_agent_temperature;
    JudgeConfig judge;
    BalanceWeights balance_weights;
    std::optional<ObjectiveWeights> objective_weights;
    std::vector<ShockSpec> shock_schedule;
    std::size_t concurrency_cap = 16;
    std::size_t max_parallel_lineages = 4;
    std::size_t max_parallel_calls = 16;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> prompts_dir;
    std::string prompt_version = "v1";
    json source;  // the document the config was parsed from

    const BackendConfig* find_backend(const std::string& ref) const;
};

// Parses and validates; throws config_error listing every problem found.
// Relative paths are resolved against `base_dir`.
CampaignConfig parse_campaign_config(const json& doc, const std::filesystem::path& base_dir = ".");
CampaignConfig load_campaign_config(const std::filesystem::path& path);

// Every violation of the config invariants, empty when valid.
std::vector<std::string> campaign_violations(const CampaignConfig& config);

struct RunPlan {
    std::size_t index = 0;  // position in the grid
    std::string run_id;
    Protocol protocol = Protocol::sequential;
    int n_agents = 1;
    std::size_t task_index = 0;
    const Task* task = nullptr;  // points into CampaignConfig::tasks
    std::uint64_t seed = 0;
    std::optional<ShockSpec> shock;  // applied right before this run
    std::string lineage;
};

// protocols x agent_counts x tasks x seeds, in that nesting order.
std::vector<RunPlan> expand_grid(const CampaignConfig& config);

// Lineage = (protocol, N, seed): the runs sharing one organisation memory and shock history.
std::string lineage_id(Protocol protocol, int n_agents, std::uint64_t seed);

// Instantiates every configured backend. Throws config_error for missing credentials etc.
BackendRegistry build_registry(const CampaignConfig& config);

struct ExecuteOptions {
    // Simulated interrupt: stop after this many newly written records.
    std::optional<std::size_t> stop_after_runs;
    // Use these backends instead of building them from the config.
    std::shared_ptr<BackendRegistry> registry;
    std::function<void(const RunRecord&)> on_record;
};

struct CampaignResult {
    std::filesystem::path results_dir;
    std::size_t planned = 0;
    std::size_t executed = 0;
    std::size_t skipped = 0;  // already present in the log
    std::size_t failed = 0;
    bool interrupted = false;
};

inline constexpr const char* runs_log_name = "runs.jsonl";
inline constexpr const char* events_log_name = "events.jsonl";
inline constexpr const char* manifest_name = "manifest.json";

// Runs the grid, appending records to <output_dir>/runs.jsonl in plan order. Runs whose
// run_id is already logged are skipped; their records rebuild the lineage state.
CampaignResult execute_campaign(const CampaignConfig& config, const ExecuteOptions& options = {});

// Reads runs.jsonl, dropping a trailing partial line.
std::vector<RunRecord> read_run_log(const std::filesystem::path& path);

}  // namespace agentorg
