#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agentorg/backend.hpp"
#include "agentorg/core.hpp"
#include "agentorg/mock_backend.hpp"
#include "agentorg/prompts.hpp"

namespace agentorg {

// Observed [min, max] of a raw metric over a batch.
struct MetricRange {
    double min = 0.0;
    double max = 0.0;

    // (x - min) / (max - min), or 0 when the range is degenerate.
    double normalize(double x) const noexcept;
};

// Batch ranges for time (wall seconds), cost (tokens) and risk (events).
struct NormalizationSpec {
    MetricRange time;
    MetricRange cost;
    MetricRange risk;

    // Throws empty_series for an empty batch.
    static NormalizationSpec from_records(std::span<const RunRecord> records);
};

struct BalanceWeights {
    double w_q = 0.25;
    double w_m = 0.20;
    double w_t = 0.20;
    double w_c = 0.20;
    double w_r = 0.15;

    // All >= 0 and summing to 1 (within 1e-9).
    void validate() const;
};

void to_json(json& j, const BalanceWeights& w);
void from_json(const json& j, BalanceWeights& w);

// (s_acc + s_comp + s_coh + s_act) / 16, in [0.25, 1].
double aggregate_quality(const JudgeScores& scores);
// s_mis / 4, in [0.25, 1].
double mission_relevance(const JudgeScores& scores);

// Weighted sum of fixed-range Q and M and batch-inverted T, C, R. Result in [0, 1].
double balance_index(const RunRecord& record, const BalanceWeights& weights, const NormalizationSpec& norm);

// Q per thousand tokens; nullopt when the record is unjudged or used no tokens.
std::optional<double> quality_per_1k_tokens(const RunRecord& record);

// Deterministic judge for mock campaigns. role_coverage: every criterion is
// round(1 + 3c) with c the covered share of the vocabulary, minus one point of
// completeness per colliding role pair (floor 1). uniform: i.i.d. scores keyed by
// (seed, task_id), so every protocol and team size gets the same draw for a task instance.
JudgeScores synthetic_judge(const RunRecord& record, const MockAgentPolicy& policy);

// Number of unordered pairs of contributors that chose the same role.
int role_collision_pairs(const RunRecord& record);

// Accepts "acc:3 comp:4 ..." style lines, long criterion names and JSON objects.
std::optional<JudgeScores> parse_judge_reply(std::string_view text);

struct JudgeBinding {
    std::string ref;
    TextCompleter* completer = nullptr;
};

struct JudgeOutcome {
    std::optional<JudgeScores> scores;
    TokenUsage usage;
    int risk_events = 0;
    int calls = 0;
};

// LLM-as-judge over the contributed final-round content. The judge must not share a
// backend_ref or model with any agent of the run (config_error otherwise). An
// unparseable reply is retried once, then reported as a risk event without scores.
JudgeOutcome judge_solution(const RunRecord& record, const Task& task, const std::vector<AgentSpec>& agents,
                            const JudgeBinding& judge, const PromptTemplate& rubric);

// Concatenated contributed content of the deciding round.
std::string solution_text(const RunRecord& record);

}  // namespace agentorg
