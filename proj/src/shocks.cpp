#include "agentorg/shocks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agentorg/errors.hpp"

namespace agentorg {

namespace {

ShockOutcome keep_except(const std::vector<AgentSpec>& agents, const std::set<int>& removed) {
    ShockOutcome out;
    for (const auto& a : agents) {
        if (removed.count(a.agent_index)) continue;
        AgentSpec moved = a;
        moved.agent_index = static_cast<int>(out.agents.size());
        out.index_map[a.agent_index] = moved.agent_index;
        out.agents.push_back(std::move(moved));
    }
    out.affected.assign(removed.begin(), removed.end());
    return out;
}

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void validate_shock(const ShockSpec& spec, int campaign_length) {
    if (spec.at_task_index < 0 || spec.at_task_index >= campaign_length) {
        throw config_error("shock " + std::string(to_string(spec.kind)) + " at task " +
                           std::to_string(spec.at_task_index) + " is outside the campaign (" +
                           std::to_string(campaign_length) + " tasks)");
    }
    switch (spec.kind) {
        case ShockKind::remove_random:
            if (spec.removal_count < 1) throw config_error("remove_random needs removal_count >= 1");
            break;
        case ShockKind::remove_hub:
            break;
        case ShockKind::substitute_model:
            if (!(spec.substitute_fraction > 0.0 && spec.substitute_fraction <= 1.0)) {
                throw config_error("substitute_model fraction must be in (0, 1]");
            }
            if (spec.replacement_model.empty()) throw config_error("substitute_model needs replacement_model");
            break;
        case ShockKind::priority_shift:
            if (spec.shifted_mission.empty()) throw config_error("priority_shift needs shifted_mission");
            break;
    }
}

int hub_node(const InteractionGraph& graph) {
    int best = 0;
    int best_degree = -1;
    for (int v = 0; v < graph.n_nodes; ++v) {
        const int d = graph.degree(v);
        if (d > best_degree) {
            best = v;
            best_degree = d;
        }
    }
    return best;
}

ShockOutcome apply_shock(const ShockSpec& spec, const std::vector<AgentSpec>& agents,
                         const InteractionGraph& graph, const RngKey& rng_key) {
    if (agents.empty()) throw config_error("cannot apply a shock to an empty agent set");
    const int n = static_cast<int>(agents.size());
    Rng rng(rng_key);

    switch (spec.kind) {
        case ShockKind::remove_random: {
            if (spec.removal_count >= n) {
                throw config_error("remove_random of " + std::to_string(spec.removal_count) + " agents would leave " +
                                   std::to_string(std::max(0, n - spec.removal_count)) + " agents");
            }
            std::set<int> removed;
            for (auto i : rng.sample_without_replacement(agents.size(), static_cast<std::size_t>(spec.removal_count))) {
                removed.insert(agents[i].agent_index);
            }
            return keep_except(agents, removed);
        }
        case ShockKind::remove_hub: {
            if (n <= 1) throw config_error("remove_hub would leave 0 agents");
            const int hub = graph.n_nodes > 0 ? std::min(hub_node(graph), n - 1) : 0;
            return keep_except(agents, {hub});
        }
        case ShockKind::substitute_model: {
            if (!(spec.substitute_fraction > 0.0 && spec.substitute_fraction <= 1.0)) {
                throw config_error("substitute_model fraction must be in (0, 1]");
            }
            const auto m = static_cast<std::size_t>(std::ceil(spec.substitute_fraction * n - 1e-9));
            ShockOutcome out;
            out.agents = agents;
            for (const auto& a : agents) out.index_map[a.agent_index] = a.agent_index;
            auto chosen = rng.sample_without_replacement(agents.size(), m);
            std::sort(chosen.begin(), chosen.end());
            for (auto i : chosen) {
                out.agents[i].model_id = spec.replacement_model;
                if (!spec.replacement_backend.empty()) out.agents[i].backend_ref = spec.replacement_backend;
                out.affected.push_back(agents[i].agent_index);
            }
            return out;
        }
        case ShockKind::priority_shift: {
            if (spec.shifted_mission.empty()) throw config_error("priority_shift needs shifted_mission");
            ShockOutcome out;
            out.agents = agents;
            for (const auto& a : agents) out.index_map[a.agent_index] = a.agent_index;
            out.mission = spec.shifted_mission;
            return out;
        }
    }
    throw config_error("unknown shock kind");
}

double resilience_index(std::span<const double> q, int shock_index, int window) {
    if (window < 1) throw precondition_error("resilience window must be >= 1");
    if (shock_index < window) throw precondition_error("resilience: not enough pre-shock tasks for the window");
    if (static_cast<std::size_t>(shock_index + window) > q.size()) {
        throw precondition_error("resilience: not enough post-shock tasks for the window");
    }
    const auto w = static_cast<std::size_t>(window);
    const auto s = static_cast<std::size_t>(shock_index);
    const double before = mean_of(q.subspan(s - w, w));
    const double after = mean_of(q.subspan(s, w));
    if (before == 0.0) throw undefined_metric("resilience index: pre-shock mean is 0");
    return std::min(1.0, after / before);
}

std::optional<int> recovery_time(std::span<const double> q, int shock_index, double epsilon) {
    if (shock_index < 1 || static_cast<std::size_t>(shock_index) > q.size()) {
        throw precondition_error("recovery_time: shock index outside the series");
    }
    const double target = mean_of(q.first(static_cast<std::size_t>(shock_index))) - epsilon;
    for (std::size_t i = static_cast<std::size_t>(shock_index) + 1; i < q.size(); ++i) {
        if (q[i] >= target) return static_cast<int>(i) - shock_index;
    }
    return std::nullopt;
}

}  // namespace agentorg
