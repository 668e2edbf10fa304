#include <fstream>

#include "doctest.h"
#include "agentorg/errors.hpp"
#include "agentorg/prompts.hpp"
#include "helpers.hpp"

using namespace agentorg;
using namespace testing_support;

TEST_CASE("template rendering") {
    PromptTemplate t("demo", "Hello {name}, task {task_id}. Literal {Not_A} and {} stay.");
    CHECK(t.placeholders() == std::set<std::string>{"name", "task_id"});
    CHECK(t.render({{"name", "A"}, {"task_id", "T-1"}, {"extra", "unused"}}) ==
          "Hello A, task T-1. Literal {Not_A} and {} stay.");
    CHECK_THROWS_AS(t.render({{"name", "A"}}), config_error);
    // Substituted values are not rescanned.
    CHECK(t.render({{"name", "{task_id}"}, {"task_id", "x"}}) == "Hello {task_id}, task x. Literal {Not_A} and {} stay.");
}

TEST_CASE("built-in prompts render for every call kind") {
    const auto prompts = PromptSet::builtin();
    CHECK(prompts.version == prompt_template_version);
    for (auto kind : {CallKind::plan, CallKind::work, CallKind::sequential, CallKind::intention,
                      CallKind::final_decision, CallKind::shared}) {
        AgentRequest req;
        req.kind = kind;
        req.n_agents = 3;
        req.agent = make_agents(3)[1];
        req.context.task = make_task("T-9", Level::L2);
        req.context.mission = "Keep the customer safe";
        req.context.coordinator_directive = Directive{"analyst", "research", true};
        req.context.visible_intentions = {{0, "writer"}};
        const auto values = prompt_values(req);
        std::string text;
        CHECK_NOTHROW(text = prompts.for_kind(kind).render(values));
        CHECK_NOTHROW(prompts.system.render(values));
        CHECK(text.find("Describe the task T-9") != std::string::npos);
    }
}

TEST_CASE("prompt directory overrides") {
    const auto dir = fresh_dir("prompts");
    {
        std::ofstream out(dir / "sequential.txt");
        out << "Custom {task_description}";
    }
    const auto set = PromptSet::from_directory(dir, "custom-1");
    CHECK(set.version == "custom-1");
    CHECK(set.sequential.text() == "Custom {task_description}");
    CHECK(set.shared.text() == PromptSet::builtin().shared.text());
    CHECK_THROWS_AS(PromptTemplate::from_file(dir / "missing.txt"), config_error);
}

TEST_CASE("formatting helpers") {
    TurnOutput t;
    t.agent_index = 2;
    t.role_name = "critic";
    t.content = "looks fine";
    const auto text = format_outputs({t});
    CHECK(text.find("critic") != std::string::npos);
    CHECK(text.find("looks fine") != std::string::npos);
    CHECK(format_intentions({{1, "builder"}}).find("builder") != std::string::npos);
    OrgMemory m;
    m.append(0, {"T-1", "scout"});
    CHECK(format_memory(m).find("scout") != std::string::npos);
    CHECK(format_directive(Directive{"lead", "p1", true}).find("lead") != std::string::npos);
}
