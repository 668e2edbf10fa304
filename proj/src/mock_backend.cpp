#include "agentorg/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <thread>

#include "agentorg/errors.hpp"

namespace agentorg {

namespace {

constexpr std::array<const char*, 16> base_roles{
    "architect",        "analyst",          "security_reviewer", "compliance_officer",
    "risk_assessor",    "data_engineer",    "product_strategist", "financial_controller",
    "legal_counsel",    "operations_lead",  "qa_engineer",        "integration_planner",
    "ux_researcher",    "devops_engineer",  "domain_expert",      "editor",
};

std::string contribution_text(const AgentRequest& req, const std::string& role) {
    return "[" + role + "] agent " + std::to_string(req.agent.agent_index) + " on " + req.context.task.task_id +
           ": " + std::string(to_string(req.kind)) + " contribution";
}

std::vector<int> pick_dependencies(const VisibilityContext& ctx, int self, int fanin, Rng& rng) {
    std::vector<int> contributors;
    for (const auto& t : ctx.visible_outputs) {
        if (t.contributed() && t.agent_index != self) contributors.push_back(t.agent_index);
    }
    std::vector<int> deps;
    for (auto i : rng.sample_without_replacement(contributors.size(), static_cast<std::size_t>(fanin))) {
        deps.push_back(contributors[i]);
    }
    std::sort(deps.begin(), deps.end());
    return deps;
}

// Role every agent ends up with if all of them resolve collisions greedily in index order.
std::string greedy_resolution(const VisibilityContext& ctx, const MockAgentPolicy& policy, int self,
                              const std::string& fallback) {
    std::set<std::string> taken;
    const std::set<std::string> vocab(policy.role_vocabulary.begin(), policy.role_vocabulary.end());
    auto intentions = ctx.visible_intentions;
    std::sort(intentions.begin(), intentions.end(),
              [](const Intention& a, const Intention& b) { return a.agent_index < b.agent_index; });
    for (const auto& i : intentions) {
        std::string chosen;
        if (vocab.count(i.role_name) && !taken.count(i.role_name)) {
            chosen = i.role_name;
        } else {
            for (const auto& r : policy.role_vocabulary) {
                if (!taken.count(r)) {
                    chosen = r;
                    break;
                }
            }
        }
        if (chosen.empty()) {
            if (i.agent_index == self) return fallback;
            continue;
        }
        taken.insert(chosen);
        if (i.agent_index == self) return chosen;
    }
    return fallback;
}

}  // namespace

std::string_view to_string(QualityModel model) {
    return model == QualityModel::uniform ? "uniform" : "role_coverage";
}

QualityModel parse_quality_model(std::string_view text) {
    if (text == "uniform") return QualityModel::uniform;
    if (text == "role_coverage") return QualityModel::role_coverage;
    throw config_error("unknown quality_model '" + std::string(text) + "'");
}

void MockAgentPolicy::validate() const {
    if (role_vocabulary.empty()) throw config_error("mock policy: role_vocabulary must be non-empty");
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw config_error(std::string("mock policy: ") + name + " outside [0,1]");
    };
    prob(collision_avoidance, "collision_avoidance");
    prob(abstain_propensity, "abstain_propensity");
    if (dependency_fanin < 0) throw config_error("mock policy: dependency_fanin must be >= 0");
    if (directed_idle < 0) throw config_error("mock policy: directed_idle must be >= 0");
    if (tokens_per_call.prompt_tokens < 0 || tokens_per_call.completion_tokens < 0) {
        throw config_error("mock policy: token counts must be non-negative");
    }
}

void to_json(json& j, const MockAgentPolicy& p) {
    j = json{{"role_vocabulary", p.role_vocabulary},
             {"collision_avoidance", p.collision_avoidance},
             {"abstain_propensity", p.abstain_propensity},
             {"abstain_only_when_covered", p.abstain_only_when_covered},
             {"dependency_fanin", p.dependency_fanin},
             {"quality_model", to_string(p.quality_model)},
             {"tokens_per_call", {{"prompt", p.tokens_per_call.prompt_tokens},
                                  {"completion", p.tokens_per_call.completion_tokens}}},
             {"directed_idle", p.directed_idle}};
}

void from_json(const json& j, MockAgentPolicy& p) {
    if (j.contains("role_vocabulary")) {
        p.role_vocabulary = j.at("role_vocabulary").get<std::vector<std::string>>();
    } else {
        p.role_vocabulary = default_role_vocabulary(j.value("vocabulary_size", std::size_t{8}));
    }
    p.collision_avoidance = j.value("collision_avoidance", 0.0);
    p.abstain_propensity = j.value("abstain_propensity", 0.0);
    p.abstain_only_when_covered = j.value("abstain_only_when_covered", false);
    p.dependency_fanin = j.value("dependency_fanin", 0);
    p.quality_model = parse_quality_model(j.value("quality_model", std::string("role_coverage")));
    if (j.contains("tokens_per_call")) {
        const auto& t = j.at("tokens_per_call");
        p.tokens_per_call = {t.value("prompt", std::int64_t{100}), t.value("completion", std::int64_t{50})};
    }
    p.directed_idle = j.value("directed_idle", 0);
    p.validate();
}

std::vector<std::string> default_role_vocabulary(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(i < base_roles.size() ? std::string(base_roles[i]) : "specialist_" + std::to_string(i));
    }
    return out;
}

AgentReply mock_respond(const AgentRequest& req, const MockAgentPolicy& policy) {
    Rng rng(req.rng_key);
    const auto& vocab = policy.role_vocabulary;
    const int self = req.agent.agent_index;
    const TokenUsage ack{policy.tokens_per_call.prompt_tokens, 0};

    AgentReply reply;
    switch (req.kind) {
        case CallKind::plan: {
            const int idle = std::min(policy.directed_idle, std::max(0, req.n_agents - 1));
            static constexpr std::array<const char*, 3> phases{"analysis", "execution", "review"};
            for (int i = 0; i < req.n_agents; ++i) {
                Directive d;
                d.assigned_role = vocab[static_cast<std::size_t>(i) % vocab.size()];
                d.phase = phases[static_cast<std::size_t>(i) * phases.size() / static_cast<std::size_t>(req.n_agents)];
                d.participate = i < req.n_agents - idle;
                reply.directives.emplace(i, std::move(d));
            }
            reply.role = "coordinator";
            reply.content = "plan for " + req.context.task.task_id;
            reply.usage = policy.tokens_per_call;
            return reply;
        }
        case CallKind::work: {
            const auto& d = req.context.coordinator_directive;
            if (!d || !d->participate) {
                reply.participate = false;
                reply.content.clear();
                reply.usage = ack;
                return reply;
            }
            reply.role = d->assigned_role;
            reply.content = contribution_text(req, d->assigned_role);
            reply.usage = policy.tokens_per_call;
            return reply;
        }
        default:
            break;
    }

    const auto visible = req.context.visible_roles(self);
    const std::set<std::string> seen(visible.begin(), visible.end());
    std::vector<std::string> absent;
    for (const auto& r : vocab) {
        if (!seen.count(r)) absent.push_back(r);
    }
    const bool covered = absent.empty();

    const double abstain_draw = rng.uniform01();
    const double avoid_draw = rng.uniform01();

    if (req.kind != CallKind::intention && abstain_draw < policy.abstain_propensity &&
        (!policy.abstain_only_when_covered || covered)) {
        reply.participate = false;
        reply.usage = ack;
        return reply;
    }

    std::string role;
    if (req.kind == CallKind::final_decision) {
        std::string own;
        for (const auto& i : req.context.visible_intentions) {
            if (i.agent_index == self) own = i.role_name;
        }
        const std::string random_role = vocab[rng.below(vocab.size())];
        const std::string kept = (own.empty() || own == unknown_intention) ? random_role : own;
        role = avoid_draw < policy.collision_avoidance ? greedy_resolution(req.context, policy, self, kept) : kept;
    } else if (avoid_draw < policy.collision_avoidance && !absent.empty()) {
        role = absent[rng.below(absent.size())];
    } else {
        role = vocab[rng.below(vocab.size())];
    }

    if (req.kind != CallKind::intention) {
        reply.dependencies = pick_dependencies(req.context, self, policy.dependency_fanin, rng);
    }
    reply.role = role;
    reply.content = req.kind == CallKind::intention ? "intends " + role : contribution_text(req, role);
    reply.usage = policy.tokens_per_call;
    return reply;
}

TurnOutput mock_generate(const VisibilityContext& context, const MockAgentPolicy& policy, const RngKey& rng_key,
                         CallKind kind) {
    AgentRequest req;
    req.kind = kind;
    req.agent.agent_index = static_cast<int>(rng_key.agent_index);
    req.context = context;
    req.rng_key = rng_key;
    const auto reply = mock_respond(req, policy);

    TurnOutput turn;
    turn.agent_index = req.agent.agent_index;
    turn.round = kind == CallKind::final_decision ? 2 : 1;
    turn.token_usage = reply.usage;
    if (reply.participate && reply.role && !reply.content.empty()) {
        turn.participation = Participation::contributed;
        turn.role_name = reply.role;
        turn.content = reply.content;
        turn.declared_dependencies = reply.dependencies;
    } else {
        turn.participation =
            kind == CallKind::work ? Participation::directed_idle : Participation::voluntary_abstain;
    }
    return turn;
}

MockBackend::MockBackend(MockAgentPolicy policy, std::chrono::milliseconds call_delay)
    : policy_(std::move(policy)), delay_(call_delay) {
    policy_.validate();
}

AgentReply MockBackend::respond(const AgentRequest& request) {
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    return mock_respond(request, policy_);
}

}  // namespace agentorg
