#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "agentorg/backend.hpp"

namespace agentorg {

enum class QualityModel { uniform, role_coverage };

std::string_view to_string(QualityModel model);
QualityModel parse_quality_model(std::string_view text);

// Synthetic agent behaviour for deterministic, desk-scale campaigns.
struct MockAgentPolicy {
    std::vector<std::string> role_vocabulary;
    double collision_avoidance = 0.0;  // P(pick a role not yet visible)
    double abstain_propensity = 0.0;
    bool abstain_only_when_covered = false;
    int dependency_fanin = 0;
    QualityModel quality_model = QualityModel::role_coverage;
    TokenUsage tokens_per_call{100, 50};
    int directed_idle = 0;  // workers the mock coordinator sends idle (highest indices first)

    void validate() const;
};

void to_json(json& j, const MockAgentPolicy& policy);
void from_json(const json& j, MockAgentPolicy& policy);

// n role names: a fixed list of organisational roles, extended with "specialist_k".
std::vector<std::string> default_role_vocabulary(std::size_t n);

// Total function: every request gets a reply, fully determined by request.rng_key.
AgentReply mock_respond(const AgentRequest& request, const MockAgentPolicy& policy);

// Single-turn convenience for role-choosing calls (Sequential/Shared style).
TurnOutput mock_generate(const VisibilityContext& context, const MockAgentPolicy& policy, const RngKey& rng_key,
                         CallKind kind = CallKind::sequential);

class MockBackend final : public AgentBackend {
public:
    explicit MockBackend(MockAgentPolicy policy, std::chrono::milliseconds call_delay = {});

    AgentReply respond(const AgentRequest& request) override;
    std::string describe() const override { return "mock"; }
    const MockAgentPolicy& policy() const noexcept { return policy_; }

private:
    MockAgentPolicy policy_;
    std::chrono::milliseconds delay_;
};

}  // namespace agentorg
