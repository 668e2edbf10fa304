#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "agentorg/engine.hpp"
#include "agentorg/errors.hpp"
#include "agentorg/evaluation.hpp"
#include "helpers.hpp"

using namespace agentorg;
using namespace testing_support;

namespace {

RunRecord scored(const std::string& id, JudgeScores s, double wall, std::int64_t tokens, int risk) {
    RunRecord r;
    r.run_id = id;
    r.judge = s;
    r.wall_time_seconds = wall;
    r.total_tokens = tokens;
    r.risk_events = risk;
    return r;
}

class FakeCompleter final : public TextCompleter {
public:
    FakeCompleter(std::vector<std::string> replies, std::string model) : replies_(std::move(replies)), model_(std::move(model)) {}
    CompletionResult complete(const CompletionRequest& request) override {
        last_prompt = request.user_prompt;
        last_temperature = request.temperature;
        CompletionResult r;
        r.ok = true;
        r.text = replies_.at(std::min(calls, replies_.size() - 1));
        r.usage = {30, 5};
        r.attempts = 1;
        ++calls;
        return r;
    }
    std::string model_id() const override { return model_; }

    std::size_t calls = 0;
    std::string last_prompt;
    double last_temperature = -1;

private:
    std::vector<std::string> replies_;
    std::string model_;
};

RunRecord record_with_roles(const std::vector<std::string>& roles) {
    RunRecord r;
    r.protocol = Protocol::sequential;
    r.n_agents = static_cast<int>(roles.size());
    for (std::size_t i = 0; i < roles.size(); ++i) {
        TurnOutput t;
        t.agent_index = static_cast<int>(i);
        t.role_name = roles[i];
        t.content = "c";
        r.turns.push_back(t);
    }
    return r;
}

}  // namespace

TEST_CASE("aggregate quality anchors") {
    CHECK(aggregate_quality({4, 4, 4, 4, 1}) == 1.0);
    CHECK(aggregate_quality({1, 1, 1, 1, 4}) == 0.25);
    CHECK(aggregate_quality({3, 4, 3, 4, 1}) == 0.875);
    CHECK(mission_relevance({1, 1, 1, 1, 3}) == 0.75);
}

TEST_CASE("balance index extremes and hand batch") {
    const BalanceWeights w;
    std::vector<RunRecord> batch{scored("best", {4, 4, 4, 4, 4}, 1.0, 100, 0),
                                 scored("worst", {1, 1, 1, 1, 1}, 9.0, 900, 4),
                                 scored("mid", {3, 2, 4, 3, 2}, 3.0, 500, 1)};
    const auto norm = NormalizationSpec::from_records(batch);
    CHECK(balance_index(batch[0], w, norm) == 1.0);
    CHECK(balance_index(batch[1], w, norm) == 0.0);
    // Spreadsheet: Q = 12/16 -> Q^ = 2/3; M = 0.5 -> M^ = 1/3; T = 1 - 2/8; C = 1 - 0.5; R = 1 - 0.25.
    const double expected = 0.25 * (2.0 / 3) + 0.20 * (1.0 / 3) + 0.20 * 0.75 + 0.20 * 0.5 + 0.15 * 0.75;
    CHECK(std::abs(balance_index(batch[2], w, norm) - expected) < 1e-9);

    RunRecord unjudged = batch[2];
    unjudged.judge.reset();
    CHECK_THROWS_AS(balance_index(unjudged, w, norm), unjudged_record);
}

TEST_CASE("balance weights validation") {
    BalanceWeights w;
    CHECK_NOTHROW(w.validate());
    w.w_q = 0.5;
    CHECK_THROWS(w.validate());
    const auto parsed = json{{"w_q", 0.2}, {"w_m", 0.2}, {"w_t", 0.2}, {"w_c", 0.2}, {"w_r", 0.2}}.get<BalanceWeights>();
    CHECK(parsed.w_r == 0.2);
}

TEST_CASE("normalization degenerate range") {
    MetricRange r{5, 5};
    CHECK(r.normalize(5) == 0.0);
    MetricRange s{0, 10};
    CHECK(s.normalize(2.5) == 0.25);
    std::vector<RunRecord> none;
    CHECK_THROWS_AS(NormalizationSpec::from_records(none), empty_series);
}

TEST_CASE("quality per thousand tokens") {
    auto r = scored("a", {4, 4, 4, 4, 4}, 1, 2000, 0);
    CHECK(*quality_per_1k_tokens(r) == 0.5);
    r.total_tokens = 0;
    CHECK_FALSE(quality_per_1k_tokens(r).has_value());
}

TEST_CASE("synthetic judge examples") {
    const auto policy = make_policy(8);
    const auto all = record_with_roles(policy.role_vocabulary);
    CHECK(synthetic_judge(all, policy) == JudgeScores{4, 4, 4, 4, 4});
    CHECK(aggregate_quality(synthetic_judge(all, policy)) == 1.0);
    const auto same = record_with_roles(std::vector<std::string>(8, policy.role_vocabulary[0]));
    CHECK(synthetic_judge(same, policy) == JudgeScores{1, 1, 1, 1, 1});
    CHECK(aggregate_quality(synthetic_judge(same, policy)) == 0.25);
}

TEST_CASE("synthetic judge equals a recount from the turns") {
    const auto policy = make_policy(6, 0.4, 0.1);
    auto reg = mock_registry(policy);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        OrgMemory m;
        const auto r = run_protocol(seed % 2 ? Protocol::shared : Protocol::broadcast, make_setup(7, seed), reg, m);
        std::map<std::string, int> counts;
        for (const auto& t : r.turns) {
            if (t.round == r.final_round() && t.participation == Participation::contributed) ++counts[*t.role_name];
        }
        int pairs = 0;
        int covered = 0;
        for (const auto& role : policy.role_vocabulary) covered += counts.count(role) ? 1 : 0;
        for (const auto& [_, k] : counts) pairs += k * (k - 1) / 2;
        const int base = static_cast<int>(std::floor(1.0 + 3.0 * covered / 6.0 + 0.5));
        const auto s = synthetic_judge(r, policy);
        CHECK(s.s_acc == base);
        CHECK(s.s_coh == base);
        CHECK(s.s_act == base);
        CHECK(s.s_mis == base);
        CHECK(s.s_comp == std::max(1, base - pairs));
    }
}

TEST_CASE("uniform synthetic judge is keyed by seed and task") {
    auto policy = make_policy(4);
    policy.quality_model = QualityModel::uniform;
    RunRecord r;
    r.run_id = "x";
    r.task_id = "T-1";
    r.seed = 3;
    const auto first = synthetic_judge(r, policy);
    r.run_id = "y";
    r.n_agents = 64;
    r.protocol = Protocol::broadcast;
    CHECK(synthetic_judge(r, policy) == first);
    std::set<int> seen;
    std::set<std::string> distinct;
    for (int i = 0; i < 200; ++i) {
        r.task_id = "T-" + std::to_string(i);
        const auto s = synthetic_judge(r, policy);
        CHECK_NOTHROW(s.validate());
        seen.insert(s.s_acc);
        distinct.insert(json(s).dump());
    }
    CHECK(seen.size() == 4);
    CHECK(distinct.size() > 100);
    r.task_id = "T-1";
    r.seed = 4;
    CHECK_FALSE(synthetic_judge(r, policy) == first);
}

TEST_CASE("judge reply parsing") {
    CHECK(parse_judge_reply("acc:3 comp:4 coh:3 act:4 mis:4") == JudgeScores{3, 4, 3, 4, 4});
    CHECK(parse_judge_reply("Accuracy: 2\nCompleteness = 3\nCoherence: 4\nActionability: 1\nMission relevance: 2") ==
          JudgeScores{2, 3, 4, 1, 2});
    CHECK(parse_judge_reply(R"({"s_acc": 1, "s_comp": 2, "s_coh": 3, "s_act": 4, "s_mis": 1})") ==
          JudgeScores{1, 2, 3, 4, 1});
    CHECK_FALSE(parse_judge_reply("acc:3 comp:4 coh:3 act:4").has_value());
    CHECK_FALSE(parse_judge_reply("acc:5 comp:4 coh:3 act:4 mis:1").has_value());
}

TEST_CASE("judge solution") {
    const auto rubric = PromptSet::builtin().judge_rubric;
    const auto task = make_task();
    auto reg = mock_registry(make_policy(4));
    const auto record = run_sequential(make_setup(3), reg);
    const auto agents = make_agents(3);

    SUBCASE("parses the reply at temperature 0") {
        FakeCompleter judge({"acc:3 comp:4 coh:3 act:4 mis:4"}, "judge-model");
        const auto out = judge_solution(record, task, agents, {"judge", &judge}, rubric);
        CHECK(out.scores == JudgeScores{3, 4, 3, 4, 4});
        CHECK(out.calls == 1);
        CHECK(out.risk_events == 0);
        CHECK(judge.last_temperature == 0.0);
        CHECK(judge.last_prompt.find(task.mission) != std::string::npos);
        CHECK(judge.last_prompt.find(solution_text(record)) != std::string::npos);
    }
    SUBCASE("one retry then a risk event") {
        FakeCompleter judge({"I cannot decide", "still nothing"}, "judge-model");
        const auto out = judge_solution(record, task, agents, {"judge", &judge}, rubric);
        CHECK_FALSE(out.scores.has_value());
        CHECK(out.calls == 2);
        CHECK(out.risk_events == 1);
        CHECK(out.usage == TokenUsage{60, 10});
    }
    SUBCASE("retry succeeds") {
        FakeCompleter judge({"??", "acc:1 comp:1 coh:1 act:1 mis:1"}, "judge-model");
        CHECK(judge_solution(record, task, agents, {"judge", &judge}, rubric).scores == JudgeScores{1, 1, 1, 1, 1});
    }
    SUBCASE("judge must be independent of the agents") {
        FakeCompleter judge({"acc:3 comp:4 coh:3 act:4 mis:4"}, "judge-model");
        CHECK_THROWS_AS(judge_solution(record, task, agents, {"mock", &judge}, rubric), config_error);
        FakeCompleter same_model({"acc:3 comp:4 coh:3 act:4 mis:4"}, "mock");
        CHECK_THROWS_AS(judge_solution(record, task, agents, {"judge", &same_model}, rubric), config_error);
    }
}
