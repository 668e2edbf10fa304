#include <cmath>
#include <random>

#include "doctest.h"
#include "agentorg/engine.hpp"
#include "agentorg/errors.hpp"
#include "agentorg/metrics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace agentorg;
using namespace testing_support;

namespace {

// Record whose final turns all contribute, with deps[i] the dependencies of agent i.
RunRecord with_dependencies(const std::vector<std::vector<int>>& deps) {
    RunRecord r;
    r.protocol = Protocol::sequential;
    r.n_agents = static_cast<int>(deps.size());
    for (std::size_t i = 0; i < deps.size(); ++i) {
        TurnOutput t;
        t.agent_index = static_cast<int>(i);
        t.role_name = "r" + std::to_string(i);
        t.content = "c";
        t.declared_dependencies = deps[i];
        r.turns.push_back(t);
    }
    return r;
}

InteractionGraph graph_of(int n, const std::vector<std::pair<int, int>>& edges) {
    InteractionGraph g;
    g.n_nodes = n;
    for (auto [a, b] : edges) g.add_edge(a, b);
    return g;
}

}  // namespace

TEST_CASE("RSI limiting cases and hand ledger") {
    RoleLedger constant;
    RoleLedger rotating;
    for (int a = 0; a < 4; ++a) {
        for (int t = 0; t < 6; ++t) {
            constant.per_agent[a].push_back("role" + std::to_string(a));
            rotating.per_agent[a].push_back("role" + std::to_string((a + t) % 4));
        }
    }
    CHECK(role_stability_index(constant) == 1.0);
    CHECK(role_stability_index(rotating) == 0.0);

    RoleLedger hand;
    using R = std::optional<std::string>;
    hand.per_agent[0] = {R("A"), R("A"), R("A"), R("A"), R("A")};
    hand.per_agent[1] = {R("A"), R("B"), R("A"), R("B"), R("A")};
    hand.per_agent[2] = {R("A"), R("A"), R("B"), R("B"), std::nullopt};
    hand.per_agent[3] = {std::nullopt, std::nullopt, R("A"), R("A"), R("A")};
    // Same-as-previous counts: 4, 0, 2, 3 out of 4 transitions each.
    CHECK(role_stability_index(hand) == doctest::Approx((1.0 + 0.0 + 0.5 + 0.75) / 4).epsilon(1e-15));

    RoleLedger single;
    single.per_agent[0] = {R("A")};
    CHECK_THROWS_AS(role_stability_index(single), undefined_metric);
}

TEST_CASE("ledger from mock runs") {
    auto reg = mock_registry(make_policy(4, 1.0));
    std::vector<RunRecord> runs;
    for (int t = 0; t < 3; ++t) runs.push_back(run_sequential(make_setup(4, 1, "r" + std::to_string(t)), reg));
    const auto ledger = RoleLedger::from_records(runs);
    CHECK(ledger.per_agent.size() == 4);
    CHECK(ledger.per_agent.at(2).size() == 3);
    CHECK(ledger.contributed_slots() == 12);
}

TEST_CASE("hierarchy depth") {
    CHECK(hierarchy_depth(with_dependencies({{}, {}, {}})) == 1);
    CHECK(hierarchy_depth(with_dependencies({{}, {0}, {1}})) == 3);
    const auto cyc = hierarchy_depth_detail(with_dependencies({{1}, {0}, {}}));
    CHECK(cyc.cycle_removed);
    CHECK(cyc.depth == 2);

    auto abstained = with_dependencies({{}, {0}, {1}});
    abstained.turns[1].participation = Participation::voluntary_abstain;
    abstained.turns[1].role_name.reset();
    abstained.turns[1].content.clear();
    abstained.turns[1].declared_dependencies.clear();
    CHECK(hierarchy_depth(abstained) == 1);  // 2's dependency on 1 no longer counts
}

TEST_CASE("hierarchy depth equals exhaustive path enumeration") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> order(8);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), gen);
        std::vector<std::vector<int>> deps(8);
        std::vector<std::pair<int, int>> edges;
        std::bernoulli_distribution coin(0.35);
        for (int i = 0; i < 8; ++i) {
            for (int j = i + 1; j < 8; ++j) {
                if (!coin(gen)) continue;
                deps[static_cast<std::size_t>(order[j])].push_back(order[i]);  // order[j] depends on order[i]
                edges.emplace_back(order[i], order[j]);
            }
        }
        for (auto& d : deps) std::sort(d.begin(), d.end());
        std::set<int> nodes{0, 1, 2, 3, 4, 5, 6, 7};
        CHECK(hierarchy_depth(with_dependencies(deps)) == oracle::longest_path_nodes(nodes, edges));
    }
}

TEST_CASE("spectral gap") {
    CHECK(spectral_gap(graph_of(3, {{0, 1}, {1, 2}})) == doctest::Approx(1.0).epsilon(1e-12));
    for (int n = 2; n <= 8; ++n) {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
        }
        CHECK(spectral_gap(graph_of(n, edges)) == static_cast<double>(n));
    }
    CHECK(spectral_gap(graph_of(4, {{0, 1}})) == 0.0);  // disconnected
    CHECK_THROWS_AS(spectral_gap(graph_of(1, {})), undefined_metric);
}

TEST_CASE("spectral gap matches the inertia oracle") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 7);
        std::vector<std::pair<int, int>> edges;
        std::bernoulli_distribution coin(0.5);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (coin(gen)) edges.emplace_back(i, j);
            }
        }
        CHECK(std::abs(spectral_gap(graph_of(n, edges)) - oracle::laplacian_lambda2(n, edges)) < 1e-8);
    }
}

TEST_CASE("gini") {
    RoleLedger equal;
    equal.role_counts = {{"a", 5}, {"b", 5}, {"c", 5}};
    CHECK(role_gini(equal) == 0.0);
    RoleLedger single;
    single.role_counts = {{"a", 100}};
    CHECK(role_gini(single) == 0.0);
    const std::vector<double> counts{1, 2, 3, 4};
    CHECK(std::abs(gini(counts) - oracle::gini_pairwise(counts)) < 1e-12);
    CHECK(std::abs(gini(counts) - 0.25) < 1e-12);
    const std::vector<double> with_zero{0, 1, 2, 3, 4};
    CHECK(gini(with_zero) == gini(counts));
    RoleLedger empty;
    CHECK_THROWS_AS(role_gini(empty), undefined_metric);
}

TEST_CASE("participation stats") {
    auto r = with_dependencies(std::vector<std::vector<int>>(16));
    CHECK(participation_stats(r).abstention_rate == 0.0);
    for (int i = 0; i < 4; ++i) {
        auto& t = r.turns[static_cast<std::size_t>(i)];
        t.participation = Participation::voluntary_abstain;
        t.role_name.reset();
        t.content.clear();
    }
    const auto s = participation_stats(r);
    CHECK(s.abstention_rate == 0.25);
    CHECK(s.active == 12);
    CHECK(s.voluntary_abstain == 4);
}

TEST_CASE("coordination overhead") {
    auto reg = mock_registry(make_policy(4));
    CHECK(coordination_overhead(run_sequential(make_setup(4), reg)) == 0.0);

    RunRecord c;
    c.protocol = Protocol::coordinator;
    c.coordinator_usage = {150, 50};
    c.total_tokens = 1000;
    CHECK(coordination_overhead(c) == doctest::Approx(0.2).epsilon(1e-15));

    BackendRegistry scripted;
    scripted.add("mock", std::make_shared<ScriptedBackend>([](const AgentRequest& q) {
                     AgentReply r;
                     r.role = "role" + std::to_string(q.agent.agent_index);
                     r.content = "c";
                     r.usage = q.kind == CallKind::intention ? TokenUsage{10, 2} : TokenUsage{50, 20};
                     return r;
                 }),
                 "mock");
    const auto b = run_broadcast(make_setup(8), scripted);
    CHECK(b.total_tokens == 8 * 12 + 8 * 70);
    CHECK(coordination_overhead(b) == doctest::Approx(96.0 / 656.0).epsilon(1e-15));
}

TEST_CASE("role uniqueness") {
    RoleLedger distinct;
    distinct.role_counts = {{"a", 1}, {"b", 1}, {"c", 1}};
    CHECK(role_uniqueness(distinct).unique_fraction == 1.0);
    CHECK(role_uniqueness(distinct).used_once_fraction == 1.0);
    RoleLedger same;
    same.role_counts = {{"a", 5}};
    CHECK(role_uniqueness(same).unique_fraction == 0.2);
    CHECK(role_uniqueness(same).used_once_fraction == 0.0);
    RoleLedger hand;
    hand.role_counts = {{"a", 2}, {"b", 1}, {"c", 1}};
    CHECK(role_uniqueness(hand).unique_fraction == 0.75);
    CHECK(role_uniqueness(hand).used_once_fraction == doctest::Approx(2.0 / 3).epsilon(1e-15));
}

TEST_CASE("interaction graph rejects self loops") {
    InteractionGraph g;
    g.n_nodes = 3;
    CHECK_THROWS_AS(g.add_edge(1, 1), precondition_error);
    g.add_edge(2, 0);
    CHECK(g.edges.count({0, 2}) == 1);
    CHECK(g.degree(0) == 1);
}
