#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agentorg/core.hpp"
#include "agentorg/rng.hpp"

namespace agentorg {

// Coordinator instruction for one agent.
struct Directive {
    std::string assigned_role;
    std::string phase;
    bool participate = true;

    bool operator==(const Directive&) const = default;
};

struct Intention {
    int agent_index = 0;
    std::string role_name;  // "unknown" when the round-1 call failed

    bool operator==(const Intention&) const = default;
};

inline constexpr const char* unknown_intention = "unknown";
inline constexpr const char* fallback_role = "generalist";

// Everything an agent is allowed to see for one call.
struct VisibilityContext {
    std::string mission;
    Task task;
    std::vector<TurnOutput> visible_outputs;
    std::vector<Intention> visible_intentions;
    std::optional<OrgMemory> memory_view;
    std::optional<Directive> coordinator_directive;

    // Roles named by contributed outputs and by intentions, optionally skipping one agent.
    std::vector<std::string> visible_roles(int exclude_agent = -1) const;
};

enum class CallKind {
    plan,            // Coordinator planning call (agent 0)
    work,            // Coordinator execution call, directive attached
    sequential,
    intention,       // Broadcast round 1
    final_decision,  // Broadcast round 2
    shared,
};

std::string_view to_string(CallKind kind);

struct AgentRequest {
    CallKind kind = CallKind::sequential;
    int n_agents = 1;
    AgentSpec agent;
    VisibilityContext context;
    RngKey rng_key;
};

// Result of one backend call. `ok == false` means the call failed after any retries.
struct AgentReply {
    bool ok = true;
    std::string error;
    std::optional<std::string> role;
    bool participate = true;
    std::vector<int> dependencies;
    std::string content;
    TokenUsage usage;
    int risk_events = 0;                 // parse fallbacks etc. raised by the backend
    std::map<int, Directive> directives;  // plan calls only; empty means unparseable plan

    static AgentReply failure(std::string why, int risk = 1) {
        AgentReply r;
        r.ok = false;
        r.error = std::move(why);
        r.participate = false;
        r.risk_events = risk;
        return r;
    }
};

// A generation backend. Implementations must be safe for concurrent calls.
class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual AgentReply respond(const AgentRequest& request) = 0;
    virtual std::string describe() const = 0;
};

// Plain text completion used by the LLM judge.
struct CompletionRequest {
    std::string model_id;
    double temperature = default_judge_temperature;
    std::string system_prompt;
    std::string user_prompt;
};

struct CompletionResult {
    bool ok = false;
    std::string text;
    TokenUsage usage;
    int attempts = 0;
    std::string error;
};

class TextCompleter {
public:
    virtual ~TextCompleter() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    virtual std::string model_id() const = 0;
};

class BackendRegistry {
public:
    struct Entry {
        std::shared_ptr<AgentBackend> agent;
        std::shared_ptr<TextCompleter> completer;  // may be null (mock)
        std::string model_id;
    };

    void add(std::string ref, Entry entry);
    void add(std::string ref, std::shared_ptr<AgentBackend> backend, std::string model_id = "mock");

    bool contains(const std::string& ref) const { return entries_.count(ref) != 0; }
    const Entry& at(const std::string& ref) const;
    AgentBackend& agent_backend(const std::string& ref) const;

    void set_default_judge(std::string ref) { default_judge_ = std::move(ref); }
    const std::optional<std::string>& default_judge() const noexcept { return default_judge_; }

    // Throws config_error naming every agent whose backend_ref does not resolve.
    void check_resolves(const std::vector<AgentSpec>& agents) const;

private:
    std::map<std::string, Entry> entries_;
    std::optional<std::string> default_judge_;
};

}  // namespace agentorg
