#include "agentorg/backend.hpp"

#include <algorithm>

#include "agentorg/errors.hpp"

namespace agentorg {

std::vector<std::string> VisibilityContext::visible_roles(int exclude_agent) const {
    std::vector<std::string> roles;
    for (const auto& t : visible_outputs) {
        if (t.agent_index != exclude_agent && t.contributed() && t.role_name) roles.push_back(*t.role_name);
    }
    for (const auto& i : visible_intentions) {
        if (i.agent_index != exclude_agent && i.role_name != unknown_intention) roles.push_back(i.role_name);
    }
    return roles;
}

std::string_view to_string(CallKind kind) {
    switch (kind) {
        case CallKind::plan: return "plan";
        case CallKind::work: return "work";
        case CallKind::sequential: return "sequential";
        case CallKind::intention: return "intention";
        case CallKind::final_decision: return "final_decision";
        case CallKind::shared: return "shared";
    }
    return "?";
}

void BackendRegistry::add(std::string ref, Entry entry) {
    if (!entry.agent) throw config_error("backend '" + ref + "' has no agent implementation");
    entries_[std::move(ref)] = std::move(entry);
}

void BackendRegistry::add(std::string ref, std::shared_ptr<AgentBackend> backend, std::string model_id) {
    add(std::move(ref), Entry{std::move(backend), nullptr, std::move(model_id)});
}

const BackendRegistry::Entry& BackendRegistry::at(const std::string& ref) const {
    auto it = entries_.find(ref);
    if (it == entries_.end()) throw config_error("unknown backend_ref '" + ref + "'");
    return it->second;
}

AgentBackend& BackendRegistry::agent_backend(const std::string& ref) const { return *at(ref).agent; }

void BackendRegistry::check_resolves(const std::vector<AgentSpec>& agents) const {
    std::string missing;
    for (const auto& a : agents) {
        if (!contains(a.backend_ref)) {
            missing += (missing.empty() ? "" : "; ") + std::string("agent ") + std::to_string(a.agent_index) +
                       " -> '" + a.backend_ref + "'";
        }
    }
    if (!missing.empty()) throw config_error("unresolved backend_ref: " + missing);
}

}  // namespace agentorg
