#include "agentorg/engine.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "agentorg/errors.hpp"

namespace agentorg {

namespace {

using clock = std::chrono::steady_clock;

class RunBuilder {
public:
    RunBuilder(Protocol protocol, const RunSetup& setup, const BackendRegistry& backends)
        : setup_(setup), backends_(backends), started_(clock::now()) {
        setup.task.validate();
        validate_agents(setup.agents);
        backends.check_resolves(setup.agents);
        record_.run_id = setup.run_id;
        record_.protocol = protocol;
        record_.n_agents = static_cast<int>(setup.agents.size());
        record_.task_id = setup.task.task_id;
        record_.level = setup.task.level;
        record_.seed = setup.seed;
        std::set<std::string> models;
        for (const auto& a : setup.agents) models.insert(a.model_id);
        for (const auto& m : models) record_.model_id += (record_.model_id.empty() ? "" : "+") + m;
    }

    int n() const { return record_.n_agents; }
    const AgentSpec& agent(int i) const { return setup_.agents[static_cast<std::size_t>(i)]; }

    VisibilityContext base_context() const {
        VisibilityContext ctx;
        ctx.mission = setup_.task.mission;
        ctx.task = setup_.task;
        return ctx;
    }

    // Backend failures and exceptions are reported in-band.
    AgentReply call(int agent_index, CallKind kind, VisibilityContext ctx, int round) {
        AgentRequest req;
        req.kind = kind;
        req.n_agents = n();
        req.agent = agent(agent_index);
        req.context = std::move(ctx);
        req.rng_key = RngKey{setup_.seed, setup_.run_id, agent_index, round};
        ++calls_;
        try {
            CallGate::Permit permit(setup_.options.gate);
            return backends_.agent_backend(req.agent.backend_ref).respond(req);
        } catch (const std::exception& e) {
            return AgentReply::failure(e.what());
        }
    }

    // Builds a turn and accumulates risk. `allowed_deps` are the contributors this agent could see.
    TurnOutput to_turn(const AgentReply& reply, int agent_index, int round, const std::set<int>& allowed_deps,
                       Participation non_participation) {
        TurnOutput turn;
        turn.agent_index = agent_index;
        turn.round = round;
        turn.token_usage = reply.usage;
        risk_ += reply.risk_events;
        if (!reply.ok) {
            turn.participation = Participation::failed;
            return turn;
        }
        if (!reply.participate || reply.content.empty()) {
            turn.participation = non_participation;
            if (non_participation == Participation::failed) ++risk_;
            return turn;
        }
        turn.participation = Participation::contributed;
        turn.content = reply.content;
        if (reply.role && !reply.role->empty()) {
            turn.role_name = reply.role;
        } else {
            turn.role_name = fallback_role;
            ++risk_;
        }
        std::set<int> deps;
        bool dropped = false;
        for (int d : reply.dependencies) {
            if (d != agent_index && allowed_deps.count(d)) {
                deps.insert(d);
            } else {
                dropped = true;
            }
        }
        if (dropped) ++risk_;
        turn.declared_dependencies.assign(deps.begin(), deps.end());
        return turn;
    }

    void add_risk(int n) { risk_ += n; }

    RunRecord finish(std::vector<TurnOutput> turns) {
        std::stable_sort(turns.begin(), turns.end(), [](const TurnOutput& a, const TurnOutput& b) {
            return a.round != b.round ? a.round < b.round : a.agent_index < b.agent_index;
        });
        record_.turns = std::move(turns);
        record_.llm_call_count = calls_;
        record_.risk_events = risk_;
        record_.total_tokens = record_.summed_tokens();
        record_.wall_time_seconds = std::chrono::duration<double>(clock::now() - started_).count();
        return std::move(record_);
    }

    RunRecord& record() { return record_; }
    std::size_t max_parallel() const { return setup_.options.max_parallel; }

private:
    const RunSetup& setup_;
    const BackendRegistry& backends_;
    clock::time_point started_;
    RunRecord record_;
    std::atomic<int> calls_{0};
    std::atomic<int> risk_{0};
};

std::set<int> contributor_indices(const std::vector<TurnOutput>& turns) {
    std::set<int> out;
    for (const auto& t : turns) {
        if (t.contributed()) out.insert(t.agent_index);
    }
    return out;
}

}  // namespace

RunRecord run_coordinator(const RunSetup& setup, const BackendRegistry& backends) {
    if (setup.agents.size() < 2) {
        throw precondition_error("Coordinator protocol needs N >= 2 (one coordinator plus workers)");
    }
    RunBuilder run(Protocol::coordinator, setup, backends);
    const int n = run.n();

    const auto plan = run.call(0, CallKind::plan, run.base_context(), 0);
    run.record().coordinator_usage = plan.usage;
    run.add_risk(plan.risk_events);

    std::vector<Directive> directives(static_cast<std::size_t>(n));
    bool fell_back = !plan.ok || plan.directives.empty();
    for (int i = 0; i < n; ++i) {
        auto it = plan.ok ? plan.directives.find(i) : plan.directives.end();
        if (it != plan.directives.end()) {
            directives[static_cast<std::size_t>(i)] = it->second;
        } else {
            directives[static_cast<std::size_t>(i)] = Directive{fallback_role, "execution", true};
            fell_back = true;
        }
    }
    if (fell_back) run.add_risk(1);

    std::vector<TurnOutput> turns(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), run.max_parallel(), [&](std::size_t i) {
        auto ctx = run.base_context();
        ctx.coordinator_directive = directives[i];
        const int idx = static_cast<int>(i);
        const auto reply = run.call(idx, CallKind::work, std::move(ctx), 1);
        const auto idle = directives[i].participate ? Participation::failed : Participation::directed_idle;
        auto turn = run.to_turn(reply, idx, 1, {}, idle);
        if (!directives[i].participate && turn.contributed()) {
            // A worker told to stay idle does not get to contribute.
            turn = TurnOutput{idx, std::nullopt, Participation::directed_idle, {}, {}, reply.usage, 1};
            run.add_risk(1);
        }
        turns[i] = std::move(turn);
    });
    return run.finish(std::move(turns));
}

RunRecord run_sequential(const RunSetup& setup, const BackendRegistry& backends) {
    if (setup.agents.empty()) throw precondition_error("Sequential protocol needs N >= 1");
    RunBuilder run(Protocol::sequential, setup, backends);
    std::vector<TurnOutput> turns;
    std::vector<TurnOutput> visible;
    for (int k = 0; k < run.n(); ++k) {
        auto ctx = run.base_context();
        ctx.visible_outputs = visible;
        const auto reply = run.call(k, CallKind::sequential, std::move(ctx), 1);
        auto turn = run.to_turn(reply, k, 1, contributor_indices(visible), Participation::voluntary_abstain);
        if (turn.participation != Participation::failed) visible.push_back(turn);
        turns.push_back(std::move(turn));
    }
    return run.finish(std::move(turns));
}

RunRecord run_broadcast(const RunSetup& setup, const BackendRegistry& backends) {
    if (setup.agents.empty()) throw precondition_error("Broadcast protocol needs N >= 1");
    RunBuilder run(Protocol::broadcast, setup, backends);
    const auto n = static_cast<std::size_t>(run.n());

    std::vector<TurnOutput> first(n);
    std::vector<Intention> intentions(n);
    parallel_for(n, run.max_parallel(), [&](std::size_t i) {
        const int idx = static_cast<int>(i);
        const auto reply = run.call(idx, CallKind::intention, run.base_context(), 1);
        auto turn = run.to_turn(reply, idx, 1, {}, Participation::voluntary_abstain);
        intentions[i] = Intention{idx, turn.contributed() ? *turn.role_name : std::string(unknown_intention)};
        first[i] = std::move(turn);
    });

    std::vector<TurnOutput> second(n);
    parallel_for(n, run.max_parallel(), [&](std::size_t i) {
        const int idx = static_cast<int>(i);
        auto ctx = run.base_context();
        ctx.visible_intentions = intentions;
        const auto reply = run.call(idx, CallKind::final_decision, std::move(ctx), 2);
        second[i] = run.to_turn(reply, idx, 2, {}, Participation::voluntary_abstain);
    });

    first.insert(first.end(), std::make_move_iterator(second.begin()), std::make_move_iterator(second.end()));
    return run.finish(std::move(first));
}

RunRecord run_shared(const RunSetup& setup, const BackendRegistry& backends, OrgMemory& memory) {
    if (setup.agents.empty()) throw precondition_error("Shared protocol needs N >= 1");
    RunBuilder run(Protocol::shared, setup, backends);
    const auto n = static_cast<std::size_t>(run.n());
    const OrgMemory snapshot = memory;

    std::vector<TurnOutput> turns(n);
    parallel_for(n, run.max_parallel(), [&](std::size_t i) {
        const int idx = static_cast<int>(i);
        auto ctx = run.base_context();
        ctx.memory_view = snapshot;
        const auto reply = run.call(idx, CallKind::shared, std::move(ctx), 1);
        turns[i] = run.to_turn(reply, idx, 1, {}, Participation::voluntary_abstain);
    });
    auto record = run.finish(std::move(turns));
    append_run_to_memory(memory, record);
    return record;
}

RunRecord run_protocol(Protocol protocol, const RunSetup& setup, const BackendRegistry& backends,
                       OrgMemory& memory) {
    switch (protocol) {
        case Protocol::coordinator: return run_coordinator(setup, backends);
        case Protocol::sequential: return run_sequential(setup, backends);
        case Protocol::broadcast: return run_broadcast(setup, backends);
        case Protocol::shared: return run_shared(setup, backends, memory);
    }
    throw config_error("unknown protocol");
}

}  // namespace agentorg
