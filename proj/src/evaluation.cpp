#include "agentorg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "agentorg/errors.hpp"

namespace agentorg {

double MetricRange::normalize(double x) const noexcept {
    if (!(max > min)) return 0.0;
    return std::clamp((x - min) / (max - min), 0.0, 1.0);
}

NormalizationSpec NormalizationSpec::from_records(std::span<const RunRecord> records) {
    if (records.empty()) throw empty_series("empty series: cannot normalize an empty batch");
    auto range = [&](auto get) {
        MetricRange r{get(records.front()), get(records.front())};
        for (const auto& rec : records) {
            r.min = std::min(r.min, get(rec));
            r.max = std::max(r.max, get(rec));
        }
        return r;
    };
    NormalizationSpec spec;
    spec.time = range([](const RunRecord& r) { return r.wall_time_seconds; });
    spec.cost = range([](const RunRecord& r) { return static_cast<double>(r.total_tokens); });
    spec.risk = range([](const RunRecord& r) { return static_cast<double>(r.risk_events); });
    return spec;
}

void BalanceWeights::validate() const {
    double sum = 0.0;
    for (double w : {w_q, w_m, w_t, w_c, w_r}) {
        if (!(w >= 0.0)) throw config_error("balance weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw config_error("balance weights must sum to 1");
}

void to_json(json& j, const BalanceWeights& w) {
    j = json{{"w_q", w.w_q}, {"w_m", w.w_m}, {"w_t", w.w_t}, {"w_c", w.w_c}, {"w_r", w.w_r}};
}

void from_json(const json& j, BalanceWeights& w) {
    const BalanceWeights d;
    w.w_q = j.value("w_q", d.w_q);
    w.w_m = j.value("w_m", d.w_m);
    w.w_t = j.value("w_t", d.w_t);
    w.w_c = j.value("w_c", d.w_c);
    w.w_r = j.value("w_r", d.w_r);
    w.validate();
}

double aggregate_quality(const JudgeScores& s) {
    s.validate();
    return static_cast<double>(s.s_acc + s.s_comp + s.s_coh + s.s_act) / 16.0;
}

double mission_relevance(const JudgeScores& s) {
    s.validate();
    return static_cast<double>(s.s_mis) / 4.0;
}

double balance_index(const RunRecord& record, const BalanceWeights& w, const NormalizationSpec& norm) {
    if (!record.judge) throw unjudged_record(record.run_id);
    const double q_hat = (aggregate_quality(*record.judge) - 0.25) / 0.75;
    const double m_hat = (mission_relevance(*record.judge) - 0.25) / 0.75;
    const double t_hat = 1.0 - norm.time.normalize(record.wall_time_seconds);
    const double c_hat = 1.0 - norm.cost.normalize(static_cast<double>(record.total_tokens));
    const double r_hat = 1.0 - norm.risk.normalize(static_cast<double>(record.risk_events));
    return w.w_q * q_hat + w.w_m * m_hat + w.w_t * t_hat + w.w_c * c_hat + w.w_r * r_hat;
}

std::optional<double> quality_per_1k_tokens(const RunRecord& record) {
    if (!record.judge || record.total_tokens <= 0) return std::nullopt;
    return aggregate_quality(*record.judge) / (static_cast<double>(record.total_tokens) / 1000.0);
}

int role_collision_pairs(const RunRecord& record) {
    std::map<std::string, int> counts;
    for (const auto& t : record.final_turns()) {
        if (t.contributed() && t.role_name) ++counts[*t.role_name];
    }
    int pairs = 0;
    for (const auto& [_, k] : counts) pairs += k * (k - 1) / 2;
    return pairs;
}

JudgeScores synthetic_judge(const RunRecord& record, const MockAgentPolicy& policy) {
    if (policy.quality_model == QualityModel::uniform) {
        // Keyed by (seed, task) only: the organisation has no effect on the draw.
        Rng rng(RngKey{record.seed, record.task_id, -1, -1});
        auto draw = [&] { return 1 + static_cast<int>(rng.below(4)); };
        JudgeScores s;
        s.s_acc = draw();
        s.s_comp = draw();
        s.s_coh = draw();
        s.s_act = draw();
        s.s_mis = draw();
        return s;
    }
    const std::set<std::string> vocab(policy.role_vocabulary.begin(), policy.role_vocabulary.end());
    std::set<std::string> covered;
    for (const auto& t : record.final_turns()) {
        if (t.contributed() && t.role_name && vocab.count(*t.role_name)) covered.insert(*t.role_name);
    }
    const double c = vocab.empty() ? 0.0 : static_cast<double>(covered.size()) / static_cast<double>(vocab.size());
    const int base = static_cast<int>(std::lround(1.0 + 3.0 * c));
    JudgeScores s{base, base, base, base, base};
    s.s_comp = std::max(1, base - role_collision_pairs(record));
    return s;
}

std::optional<JudgeScores> parse_judge_reply(std::string_view text) {
    static const std::regex re(
        R"((?:s_)?(accuracy|acc|completeness|comp|coherence|coh|actionability|act|mission[_ ]relevance|mission|mis)[a-z_]*"?\s*[:=]\s*"?([1-4])\b)",
        std::regex::icase);
    std::map<char, int> found;  // keyed by the first letters that identify the criterion
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        std::string name = (*it)[1].str();
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
        char key = 0;
        if (name.rfind("acc", 0) == 0) key = 'a';
        else if (name.rfind("comp", 0) == 0) key = 'p';
        else if (name.rfind("coh", 0) == 0) key = 'h';
        else if (name.rfind("act", 0) == 0) key = 't';
        else if (name.rfind("mis", 0) == 0) key = 'm';
        if (key && !found.count(key)) found[key] = std::stoi((*it)[2].str());
    }
    if (found.size() != 5) return std::nullopt;
    return JudgeScores{found['a'], found['p'], found['h'], found['t'], found['m']};
}

std::string solution_text(const RunRecord& record) {
    std::string s;
    for (const auto& t : record.final_turns()) {
        if (!t.contributed()) continue;
        s += "[agent " + std::to_string(t.agent_index) + " - " + t.role_name.value_or(fallback_role) + "]\n" +
             t.content + "\n\n";
    }
    return s.empty() ? "(no contributions)" : s;
}

JudgeOutcome judge_solution(const RunRecord& record, const Task& task, const std::vector<AgentSpec>& agents,
                            const JudgeBinding& judge, const PromptTemplate& rubric) {
    if (!judge.completer) throw config_error("judge '" + judge.ref + "' has no text completer");
    for (const auto& a : agents) {
        if (a.backend_ref == judge.ref || a.model_id == judge.completer->model_id()) {
            throw config_error("judge '" + judge.ref + "' must differ from agent backends; agent " +
                               std::to_string(a.agent_index) + " uses " + a.backend_ref + "/" + a.model_id);
        }
    }
    CompletionRequest req;
    req.model_id = judge.completer->model_id();
    req.temperature = default_judge_temperature;
    req.system_prompt = "You are a strict, impartial evaluator.";
    req.user_prompt = rubric.render({{"mission", task.mission}, {"task", task.description},
                                     {"solution", solution_text(record)}});

    JudgeOutcome out;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto res = judge.completer->complete(req);
        ++out.calls;
        out.usage += res.usage;
        if (res.ok) {
            if (auto scores = parse_judge_reply(res.text)) {
                out.scores = scores;
                return out;
            }
        }
    }
    out.risk_events = 1;
    return out;
}

}  // namespace agentorg
