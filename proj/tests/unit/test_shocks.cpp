#include <map>

#include "doctest.h"
#include "agentorg/errors.hpp"
#include "agentorg/shocks.hpp"
#include "helpers.hpp"

using namespace agentorg;
using namespace testing_support;

namespace {

InteractionGraph star(int n, int centre) {
    InteractionGraph g;
    g.n_nodes = n;
    for (int i = 0; i < n; ++i) {
        if (i != centre) g.add_edge(centre, i);
    }
    return g;
}

RngKey key(std::uint64_t seed) { return {seed, "campaign", -2, 0}; }

}  // namespace

TEST_CASE("remove_hub drops the star centre") {
    ShockSpec spec;
    spec.kind = ShockKind::remove_hub;
    const auto out = apply_shock(spec, make_agents(6), star(6, 3), key(1));
    CHECK(out.affected == std::vector<int>{3});
    CHECK(out.agents.size() == 5);
    CHECK(out.index_map.count(3) == 0);
    CHECK(out.index_map.at(4) == 3);
    CHECK(out.index_map.at(2) == 2);
    for (std::size_t i = 0; i < out.agents.size(); ++i) CHECK(out.agents[i].agent_index == static_cast<int>(i));
    CHECK(hub_node(star(6, 3)) == 3);
    InteractionGraph empty;
    empty.n_nodes = 4;
    CHECK(hub_node(empty) == 0);
}

TEST_CASE("substitute_model replaces a quarter") {
    ShockSpec spec;
    spec.kind = ShockKind::substitute_model;
    spec.substitute_fraction = 0.25;
    spec.replacement_model = "other-model";
    const auto out = apply_shock(spec, make_agents(32), InteractionGraph{32, {}}, key(4));
    CHECK(out.affected.size() == 8);
    CHECK(out.agents.size() == 32);
    int replaced = 0;
    for (const auto& a : out.agents) replaced += a.model_id == "other-model" ? 1 : 0;
    CHECK(replaced == 8);
    CHECK(out.index_map.size() == 32);
}

TEST_CASE("remove_random is uniform over agents") {
    ShockSpec spec;
    spec.kind = ShockKind::remove_random;
    spec.removal_count = 1;
    std::map<int, int> hits;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto out = apply_shock(spec, make_agents(4), InteractionGraph{4, {}}, key(seed));
        REQUIRE(out.affected.size() == 1);
        ++hits[out.affected[0]];
        CHECK(out.agents.size() == 3);
    }
    // 250 expected per agent, sd ~13.7.
    for (int a = 0; a < 4; ++a) CHECK(std::abs(hits[a] - 250) < 70);

    spec.removal_count = 4;
    CHECK_THROWS_AS(apply_shock(spec, make_agents(4), InteractionGraph{4, {}}, key(1)), config_error);
}

TEST_CASE("priority_shift keeps agents and sets the mission") {
    ShockSpec spec;
    spec.kind = ShockKind::priority_shift;
    spec.shifted_mission = "Cut costs";
    const auto agents = make_agents(5);
    const auto out = apply_shock(spec, agents, InteractionGraph{5, {}}, key(1));
    CHECK(out.agents == agents);
    CHECK(out.mission == std::optional<std::string>("Cut costs"));
    spec.shifted_mission.clear();
    CHECK_THROWS_AS(validate_shock(spec, 10), config_error);
}

TEST_CASE("shock validation") {
    ShockSpec spec;
    spec.at_task_index = 10;
    CHECK_THROWS_AS(validate_shock(spec, 10), config_error);
    spec.at_task_index = 3;
    CHECK_NOTHROW(validate_shock(spec, 10));
    spec.kind = ShockKind::substitute_model;
    spec.substitute_fraction = 0.0;
    spec.replacement_model = "m";
    CHECK_THROWS_AS(validate_shock(spec, 10), config_error);
}

TEST_CASE("resilience index") {
    const std::vector<double> flat(12, 0.7);
    CHECK(resilience_index(flat, 6) == 1.0);
    std::vector<double> half{0.8, 0.8, 0.8, 0.8, 0.8, 0.4, 0.4, 0.4, 0.4, 0.4};
    CHECK(resilience_index(half, 5) == doctest::Approx(0.5).epsilon(1e-14));
    const std::vector<double> hand{0.8, 0.8, 0.8, 0.8, 0.8, 0.6, 0.7, 0.8, 0.8, 0.8};
    CHECK(resilience_index(hand, 5) == doctest::Approx(0.74 / 0.8).epsilon(1e-14));
    const std::vector<double> better{0.5, 0.5, 0.9, 0.9};
    CHECK(resilience_index(better, 2, 2) == 1.0);
    CHECK_THROWS_AS(resilience_index(hand, 3), precondition_error);
}

TEST_CASE("recovery time") {
    const std::vector<double> flat(10, 0.6);
    CHECK(recovery_time(flat, 5, 0.05) == 1);
    const std::vector<double> hand{0.8, 0.8, 0.8, 0.8, 0.8, 0.6, 0.7, 0.8, 0.8, 0.8};
    CHECK(recovery_time(hand, 5, 0.05) == 2);
    const std::vector<double> never{0.8, 0.8, 0.2, 0.2, 0.2};
    CHECK(recovery_time(never, 2, 0.05) == std::nullopt);
}
