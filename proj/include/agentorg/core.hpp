#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace agentorg {

using json = nlohmann::json;

enum class Level { L1, L2, L3, L4 };

enum class Protocol { coordinator, sequential, broadcast, shared };

enum class Participation { contributed, voluntary_abstain, directed_idle, failed };

std::string_view to_string(Level level);
std::string_view to_string(Protocol protocol);
std::string_view to_string(Participation participation);

Level parse_level(std::string_view text);
Protocol parse_protocol(std::string_view text);
Participation parse_participation(std::string_view text);

inline constexpr double default_agent_temperature = 0.7;
inline constexpr double default_judge_temperature = 0.0;

// One unit of work. `mission` is injected into every agent context.
struct Task {
    std::string task_id;
    Level level = Level::L1;
    std::vector<std::string> domain_tags;
    std::string description;
    std::string mission;

    // Throws precondition_error if the tag count does not match the level
    // (L1: 1, L2: 2, L3/L4: >= 3) or a text field is empty.
    void validate() const;
};

struct AgentSpec {
    int agent_index = 0;
    std::string model_id;
    double temperature = default_agent_temperature;
    std::string backend_ref;

    bool operator==(const AgentSpec&) const = default;
};

// Checks contiguity (0..N-1 in order) and the temperature range.
void validate_agents(const std::vector<AgentSpec>& agents);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    std::int64_t total() const noexcept { return prompt_tokens + completion_tokens; }
    TokenUsage& operator+=(const TokenUsage& other) noexcept {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        return *this;
    }
    bool operator==(const TokenUsage&) const = default;
};

struct TurnOutput {
    int agent_index = 0;
    std::optional<std::string> role_name;  // absent iff the agent did not contribute
    Participation participation = Participation::contributed;
    std::string content;
    std::vector<int> declared_dependencies;  // sorted, unique
    TokenUsage token_usage;
    int round = 1;

    bool contributed() const noexcept { return participation == Participation::contributed; }
    bool operator==(const TurnOutput&) const = default;
};

// Throws precondition_error when the participation/role/content triple is inconsistent
// or the agent depends on itself.
void validate_turn(const TurnOutput& turn);

struct JudgeScores {
    int s_acc = 1;
    int s_comp = 1;
    int s_coh = 1;
    int s_act = 1;
    int s_mis = 1;

    // Throws precondition_error unless every score is in {1,2,3,4}.
    void validate() const;
    bool operator==(const JudgeScores&) const = default;
};

enum class ShockKind { remove_random, remove_hub, substitute_model, priority_shift };

std::string_view to_string(ShockKind kind);
ShockKind parse_shock_kind(std::string_view text);

struct ShockSpec {
    ShockKind kind = ShockKind::remove_random;
    int at_task_index = 0;
    int removal_count = 1;
    double substitute_fraction = 0.25;
    std::string replacement_model;
    std::string replacement_backend;  // empty: keep each agent's backend_ref
    std::string shifted_mission;

    bool operator==(const ShockSpec&) const = default;
};

// Per-run metrics persisted alongside the record.
struct RunMetrics {
    std::optional<double> quality;
    std::optional<double> mission_relevance;
    int hierarchy_depth = 1;
    std::optional<double> spectral_gap;  // absent for single-agent runs
    int active = 0;
    int voluntary_abstain = 0;
    int directed_idle = 0;
    int failed = 0;
    double abstention_rate = 0.0;
    double coordination_overhead = 0.0;

    bool operator==(const RunMetrics&) const = default;
};

struct RunRecord {
    std::string run_id;
    Protocol protocol = Protocol::sequential;
    int n_agents = 1;
    std::string task_id;
    Level level = Level::L1;
    std::uint64_t seed = 0;
    std::string model_id;
    std::vector<TurnOutput> turns;  // ordered by (round, agent_index)
    double wall_time_seconds = 0.0;
    std::int64_t total_tokens = 0;
    int llm_call_count = 0;
    TokenUsage coordinator_usage;  // planning call of the Coordinator protocol
    TokenUsage judge_usage;
    std::optional<JudgeScores> judge;
    std::optional<std::string> judge_ref;
    int risk_events = 0;
    std::optional<ShockSpec> shock_applied;
    std::optional<RunMetrics> metrics;
    std::optional<std::string> error;  // set when the run could not be executed

    int final_round() const noexcept { return protocol == Protocol::broadcast ? 2 : 1; }
    // Turns of the deciding round (round 2 for Broadcast, round 1 otherwise).
    std::vector<TurnOutput> final_turns() const;
    // Sum of turn, coordinator and judge usage.
    std::int64_t summed_tokens() const;

    bool operator==(const RunRecord&) const = default;
};

// Number of backend calls a protocol makes for N agents.
int expected_call_count(Protocol protocol, int n_agents);

// Role history per agent, accumulated across runs of one campaign lineage.
class OrgMemory {
public:
    struct Entry {
        std::string task_id;
        std::optional<std::string> role;  // nullopt: abstained / did not contribute

        bool operator==(const Entry&) const = default;
    };

    void append(int agent_index, Entry entry);
    const std::vector<Entry>& history(int agent_index) const;
    const std::map<int, std::vector<Entry>>& by_agent() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t total_entries() const noexcept;

    // Drops agents absent from `old_to_new` and renumbers the rest.
    void remap(const std::map<int, int>& old_to_new);

    bool operator==(const OrgMemory&) const = default;

private:
    std::map<int, std::vector<Entry>> entries_;
};

// Appends every final-round turn of `record` to `memory` (failed/abstained as nullopt).
void append_run_to_memory(OrgMemory& memory, const RunRecord& record);

struct ObjectiveWeights {
    double alpha_q;
    double alpha_m;
    double alpha_t;
    double alpha_c;
    double alpha_r;

    void validate() const;
};

void to_json(json& j, const Task& task);
void from_json(const json& j, Task& task);
void to_json(json& j, const AgentSpec& agent);
void from_json(const json& j, AgentSpec& agent);
void to_json(json& j, const TokenUsage& usage);
void from_json(const json& j, TokenUsage& usage);
void to_json(json& j, const TurnOutput& turn);
void from_json(const json& j, TurnOutput& turn);
void to_json(json& j, const JudgeScores& scores);
void from_json(const json& j, JudgeScores& scores);
void to_json(json& j, const ShockSpec& shock);
void from_json(const json& j, ShockSpec& shock);
void to_json(json& j, const RunMetrics& metrics);
void from_json(const json& j, RunMetrics& metrics);
void to_json(json& j, const RunRecord& record);
void from_json(const json& j, RunRecord& record);
void to_json(json& j, const ObjectiveWeights& weights);
void from_json(const json& j, ObjectiveWeights& weights);

// One JSON document per line, no trailing newline.
std::string to_json_line(const RunRecord& record);
RunRecord parse_json_line(std::string_view line);

}  // namespace agentorg
