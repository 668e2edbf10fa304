#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agentorg/core.hpp"
#include "agentorg/metrics.hpp"
#include "agentorg/rng.hpp"

namespace agentorg {

// Campaign state after a shock. Agents are renumbered contiguously; `index_map`
// maps surviving old indices to new ones.
struct ShockOutcome {
    std::vector<AgentSpec> agents;
    std::map<int, int> index_map;
    std::optional<std::string> mission;  // set by priority_shift
    std::vector<int> affected;           // old indices removed or reassigned
};

// Throws config_error when a removal would leave no agents or parameters are invalid.
// `graph` is the interaction graph of the immediately preceding run (used by remove_hub).
ShockOutcome apply_shock(const ShockSpec& spec, const std::vector<AgentSpec>& agents,
                         const InteractionGraph& graph, const RngKey& rng_key);

// Validates kind-specific parameters against a campaign of `campaign_length` tasks.
void validate_shock(const ShockSpec& spec, int campaign_length);

// Max-degree node, lowest index on ties.
int hub_node(const InteractionGraph& graph);

inline constexpr int default_resilience_window = 5;

// min(1, mean(Q after shock) / mean(Q before shock)) over `window` tasks on each side.
// The shocked task itself is the first post-shock value.
double resilience_index(std::span<const double> q_series, int shock_index, int window = default_resilience_window);

// Smallest t >= 1 with Q[shock_index + t] >= pre-shock mean - epsilon; nullopt if never.
// The pre-shock mean uses every value before shock_index.
std::optional<int> recovery_time(std::span<const double> q_series, int shock_index, double epsilon);

}  // namespace agentorg
