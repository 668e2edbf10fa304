#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agentorg/backend.hpp"
#include "agentorg/concurrency.hpp"
#include "agentorg/core.hpp"

namespace agentorg {

struct EngineOptions {
    std::size_t max_parallel = 16;  // fan-out limit within one run
    CallGate* gate = nullptr;       // optional global in-flight call limit
};

// Inputs shared by every protocol run.
struct RunSetup {
    std::string run_id;
    std::uint64_t seed = 0;
    Task task;
    std::vector<AgentSpec> agents;
    EngineOptions options;
};

// Agent 0 plans (1 call), then all N agents execute their directive concurrently (N calls).
RunRecord run_coordinator(const RunSetup& setup, const BackendRegistry& backends);

// Agents act in index order; agent k sees the completed outputs of agents 0..k-1.
RunRecord run_sequential(const RunSetup& setup, const BackendRegistry& backends);

// Round 1: concurrent role intentions. Round 2: concurrent final decisions seeing all intentions.
RunRecord run_broadcast(const RunSetup& setup, const BackendRegistry& backends);

// Concurrent independent decisions over one memory snapshot; appends the outcome to `memory`.
RunRecord run_shared(const RunSetup& setup, const BackendRegistry& backends, OrgMemory& memory);

RunRecord run_protocol(Protocol protocol, const RunSetup& setup, const BackendRegistry& backends,
                       OrgMemory& memory);

}  // namespace agentorg
