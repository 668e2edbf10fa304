#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "agentorg/backend.hpp"
#include "agentorg/core.hpp"
#include "agentorg/engine.hpp"
#include "agentorg/mock_backend.hpp"

namespace testing_support {

using namespace agentorg;

inline Task make_task(const std::string& id = "T-1", Level level = Level::L1) {
    Task t;
    t.task_id = id;
    t.level = level;
    switch (level) {
        case Level::L1: t.domain_tags = {"security"}; break;
        case Level::L2: t.domain_tags = {"security", "finance"}; break;
        default: t.domain_tags = {"security", "finance", "legal"}; break;
    }
    t.description = "Describe the task " + id;
    t.mission = "Serve the customer well";
    return t;
}

inline std::vector<AgentSpec> make_agents(int n, const std::string& backend = "mock", const std::string& model = "mock") {
    std::vector<AgentSpec> agents;
    for (int i = 0; i < n; ++i) agents.push_back({i, model, 0.7, backend});
    return agents;
}

inline MockAgentPolicy make_policy(int vocab, double avoidance = 0.0, double abstain = 0.0) {
    MockAgentPolicy p;
    p.role_vocabulary = default_role_vocabulary(static_cast<std::size_t>(vocab));
    p.collision_avoidance = avoidance;
    p.abstain_propensity = abstain;
    return p;
}

inline BackendRegistry mock_registry(const MockAgentPolicy& policy, const std::string& ref = "mock") {
    BackendRegistry r;
    r.add(ref, std::make_shared<MockBackend>(policy), "mock");
    return r;
}

inline RunSetup make_setup(int n, std::uint64_t seed = 1, const std::string& run_id = "run") {
    RunSetup s;
    s.run_id = run_id;
    s.seed = seed;
    s.task = make_task();
    s.agents = make_agents(n);
    return s;
}

// Wraps a backend and keeps every request it receives.
class InstrumentedBackend final : public AgentBackend {
public:
    explicit InstrumentedBackend(std::shared_ptr<AgentBackend> inner) : inner_(std::move(inner)) {}

    AgentReply respond(const AgentRequest& request) override {
        {
            std::lock_guard lock(mutex_);
            requests_.push_back(request);
        }
        return inner_->respond(request);
    }
    std::string describe() const override { return "instrumented"; }

    std::vector<AgentRequest> requests() const {
        std::lock_guard lock(mutex_);
        return requests_;
    }
    void clear() {
        std::lock_guard lock(mutex_);
        requests_.clear();
    }

private:
    std::shared_ptr<AgentBackend> inner_;
    mutable std::mutex mutex_;
    std::vector<AgentRequest> requests_;
};

// Backend returning a fixed reply per (kind, agent) through a callback.
class ScriptedBackend final : public AgentBackend {
public:
    using Script = std::function<AgentReply(const AgentRequest&)>;
    explicit ScriptedBackend(Script script) : script_(std::move(script)) {}
    AgentReply respond(const AgentRequest& request) override { return script_(request); }
    std::string describe() const override { return "scripted"; }

private:
    Script script_;
};

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("agentorg_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
