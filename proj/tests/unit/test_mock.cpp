#include <cmath>
#include <set>

#include "doctest.h"
#include "agentorg/engine.hpp"
#include "agentorg/errors.hpp"
#include "agentorg/evaluation.hpp"
#include "agentorg/metrics.hpp"
#include "agentorg/mock_backend.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace agentorg;
using namespace testing_support;

TEST_CASE("forced choice under full collision avoidance") {
    MockAgentPolicy p;
    p.role_vocabulary = {"A", "B", "C"};
    p.collision_avoidance = 1.0;
    VisibilityContext ctx;
    ctx.task = make_task();
    ctx.mission = ctx.task.mission;
    for (int i = 0; i < 2; ++i) {
        TurnOutput t;
        t.agent_index = i;
        t.role_name = i == 0 ? "A" : "B";
        t.content = "x";
        ctx.visible_outputs.push_back(t);
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto turn = mock_generate(ctx, p, RngKey{seed, "r", 2, 1});
        CHECK(turn.role_name == std::optional<std::string>("C"));
    }
}

TEST_CASE("zero abstain propensity always contributes") {
    const auto p = make_policy(5, 0.3, 0.0);
    VisibilityContext ctx;
    ctx.task = make_task();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        CHECK(mock_generate(ctx, p, RngKey{seed, "r", 0, 1}).contributed());
    }
}

TEST_CASE("mock replies are a pure function of the key") {
    const auto p = make_policy(6, 0.5, 0.2);
    VisibilityContext ctx;
    ctx.task = make_task();
    const RngKey key{5, "run", 3, 1};
    CHECK(mock_generate(ctx, p, key) == mock_generate(ctx, p, key));
}

TEST_CASE("sequential with full avoidance never collides; shared matches the birthday count") {
    const auto policy = make_policy(8, 1.0);
    auto reg = mock_registry(policy);
    double collisions = 0.0;
    const int seeds = 1000;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto seq = run_sequential(make_setup(8, static_cast<std::uint64_t>(seed)), reg);
        std::set<std::string> roles;
        for (const auto& t : seq.turns) roles.insert(*t.role_name);
        CHECK(roles.size() == 8);
        CHECK(role_collision_pairs(seq) == 0);

        OrgMemory memory;
        const auto shared = run_shared(make_setup(8, static_cast<std::uint64_t>(seed)), reg, memory);
        collisions += role_collision_pairs(shared);
    }
    const double mean = collisions / seeds;
    // Pair indicators are pairwise independent with p = 1/8.
    const double expected = oracle::expected_collision_pairs(8, 8);
    const double sigma = std::sqrt(28.0 * (1.0 / 8) * (7.0 / 8) / seeds);
    CHECK(mean > 0.0);
    CHECK(std::abs(mean - expected) < 3 * sigma);
}

TEST_CASE("abstention rate tracks the propensity") {
    auto reg = mock_registry(make_policy(8, 0.0, 0.2));
    double sum = 0.0;
    const int runs = 500;
    const int n = 8;
    for (int seed = 0; seed < runs; ++seed) {
        const auto r = run_sequential(make_setup(n, static_cast<std::uint64_t>(seed)), reg);
        sum += participation_stats(r).abstention_rate;
    }
    const double mean = sum / runs;
    const double sigma = std::sqrt(0.2 * 0.8 / (runs * n));
    CHECK(std::abs(mean - 0.2) < 3 * sigma);
}

TEST_CASE("abstain only when every role is covered") {
    auto p = make_policy(3, 1.0, 1.0);
    p.abstain_only_when_covered = true;
    auto reg = mock_registry(p);
    const auto r = run_sequential(make_setup(5), reg);
    for (int i = 0; i < 3; ++i) CHECK(r.turns[static_cast<std::size_t>(i)].contributed());
    for (int i = 3; i < 5; ++i) {
        CHECK(r.turns[static_cast<std::size_t>(i)].participation == Participation::voluntary_abstain);
    }
}

TEST_CASE("dependency fan-in picks visible contributors") {
    auto p = make_policy(8, 0.0);
    p.dependency_fanin = 2;
    auto reg = mock_registry(p);
    const auto r = run_sequential(make_setup(6), reg);
    CHECK(r.turns[0].declared_dependencies.empty());
    CHECK(r.turns[1].declared_dependencies == std::vector<int>{0});
    for (std::size_t k = 2; k < r.turns.size(); ++k) {
        CHECK(r.turns[k].declared_dependencies.size() == 2);
        for (int d : r.turns[k].declared_dependencies) CHECK(d < static_cast<int>(k));
    }
    CHECK(r.risk_events == 0);
}

TEST_CASE("policy JSON") {
    const auto p = json{{"vocabulary_size", 20}, {"collision_avoidance", 0.5}, {"quality_model", "uniform"}}
                       .get<MockAgentPolicy>();
    CHECK(p.role_vocabulary.size() == 20);
    CHECK(p.role_vocabulary[16] == "specialist_16");
    CHECK(p.quality_model == QualityModel::uniform);
    CHECK(json(p).get<MockAgentPolicy>().role_vocabulary == p.role_vocabulary);
    CHECK_THROWS(json{{"collision_avoidance", 1.5}}.get<MockAgentPolicy>());
    CHECK_THROWS(json{{"quality_model", "best"}}.get<MockAgentPolicy>());
}
