#include "agentorg/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <utility>

#include "agentorg/errors.hpp"

namespace agentorg {

namespace {

constexpr std::array<std::pair<Level, std::string_view>, 4> level_names{{
    {Level::L1, "L1"},
    {Level::L2, "L2"},
    {Level::L3, "L3"},
    {Level::L4, "L4"},
}};

constexpr std::array<std::pair<Protocol, std::string_view>, 4> protocol_names{{
    {Protocol::coordinator, "Coordinator"},
    {Protocol::sequential, "Sequential"},
    {Protocol::broadcast, "Broadcast"},
    {Protocol::shared, "Shared"},
}};

constexpr std::array<std::pair<Participation, std::string_view>, 4> participation_names{{
    {Participation::contributed, "contributed"},
    {Participation::voluntary_abstain, "voluntary_abstain"},
    {Participation::directed_idle, "directed_idle"},
    {Participation::failed, "failed"},
}};

constexpr std::array<std::pair<ShockKind, std::string_view>, 4> shock_names{{
    {ShockKind::remove_random, "remove_random"},
    {ShockKind::remove_hub, "remove_hub"},
    {ShockKind::substitute_model, "substitute_model"},
    {ShockKind::priority_shift, "priority_shift"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
    for (const auto& [v, name] : table) {
        if (v == value) return name;
    }
    return "?";
}

template <typename E, std::size_t N>
E value_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view text,
           std::string_view what) {
    for (const auto& [v, name] : table) {
        if (name == text) return v;
    }
    // Case-insensitive fallback so configs may write "sequential".
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    for (const auto& [v, name] : table) {
        if (lower(name) == lower(text)) return v;
    }
    throw config_error("unknown " + std::string(what) + ": '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Level level) { return name_of(level_names, level); }
std::string_view to_string(Protocol protocol) { return name_of(protocol_names, protocol); }
std::string_view to_string(Participation p) { return name_of(participation_names, p); }
std::string_view to_string(ShockKind kind) { return name_of(shock_names, kind); }

Level parse_level(std::string_view text) { return value_of(level_names, text, "level"); }
Protocol parse_protocol(std::string_view text) { return value_of(protocol_names, text, "protocol"); }
Participation parse_participation(std::string_view text) {
    return value_of(participation_names, text, "participation");
}
ShockKind parse_shock_kind(std::string_view text) { return value_of(shock_names, text, "shock kind"); }

void Task::validate() const {
    if (task_id.empty()) throw precondition_error("task has an empty task_id");
    if (description.empty()) throw precondition_error("task " + task_id + " has an empty description");
    if (mission.empty()) throw precondition_error("task " + task_id + " has an empty mission");
    const auto tags = domain_tags.size();
    const bool ok = (level == Level::L1 && tags == 1) || (level == Level::L2 && tags == 2) ||
                    ((level == Level::L3 || level == Level::L4) && tags >= 3);
    if (!ok) {
        throw precondition_error("task " + task_id + ": level " + std::string(to_string(level)) +
                                 " does not allow " + std::to_string(tags) + " domain tags");
    }
}

void validate_agents(const std::vector<AgentSpec>& agents) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].agent_index != static_cast<int>(i)) {
            throw precondition_error("agent indices must be contiguous from 0; position " +
                                     std::to_string(i) + " holds index " +
                                     std::to_string(agents[i].agent_index));
        }
        if (!(agents[i].temperature >= 0.0 && agents[i].temperature <= 2.0)) {
            throw precondition_error("agent " + std::to_string(i) + " temperature outside [0, 2]");
        }
    }
}

void validate_turn(const TurnOutput& turn) {
    const bool has_role = turn.role_name.has_value();
    const bool has_content = !turn.content.empty();
    if (turn.contributed() != has_role || (turn.contributed() && !has_content)) {
        throw precondition_error("turn of agent " + std::to_string(turn.agent_index) +
                                 " violates contributed <=> role and content");
    }
    if (std::find(turn.declared_dependencies.begin(), turn.declared_dependencies.end(),
                  turn.agent_index) != turn.declared_dependencies.end()) {
        throw precondition_error("agent " + std::to_string(turn.agent_index) + " depends on itself");
    }
    if (turn.round < 1) throw precondition_error("turn round must be >= 1");
}

void JudgeScores::validate() const {
    for (int s : {s_acc, s_comp, s_coh, s_act, s_mis}) {
        if (s < 1 || s > 4) throw precondition_error("judge score outside {1,2,3,4}: " + std::to_string(s));
    }
}

std::vector<TurnOutput> RunRecord::final_turns() const {
    std::vector<TurnOutput> out;
    const int last = final_round();
    for (const auto& t : turns) {
        if (t.round == last) out.push_back(t);
    }
    return out;
}

std::int64_t RunRecord::summed_tokens() const {
    std::int64_t sum = coordinator_usage.total() + judge_usage.total();
    for (const auto& t : turns) sum += t.token_usage.total();
    return sum;
}

int expected_call_count(Protocol protocol, int n_agents) {
    switch (protocol) {
        case Protocol::coordinator: return n_agents + 1;
        case Protocol::sequential: return n_agents;
        case Protocol::broadcast: return 2 * n_agents;
        case Protocol::shared: return n_agents;
    }
    return 0;
}

void OrgMemory::append(int agent_index, Entry entry) {
    entries_[agent_index].push_back(std::move(entry));
}

const std::vector<OrgMemory::Entry>& OrgMemory::history(int agent_index) const {
    static const std::vector<Entry> none;
    auto it = entries_.find(agent_index);
    return it == entries_.end() ? none : it->second;
}

std::size_t OrgMemory::total_entries() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, list] : entries_) n += list.size();
    return n;
}

void OrgMemory::remap(const std::map<int, int>& old_to_new) {
    std::map<int, std::vector<Entry>> next;
    for (auto& [agent, list] : entries_) {
        auto it = old_to_new.find(agent);
        if (it != old_to_new.end()) next[it->second] = std::move(list);
    }
    entries_ = std::move(next);
}

void append_run_to_memory(OrgMemory& memory, const RunRecord& record) {
    for (const auto& t : record.final_turns()) {
        OrgMemory::Entry e{record.task_id, std::nullopt};
        if (t.contributed()) e.role = t.role_name;
        memory.append(t.agent_index, std::move(e));
    }
}

void ObjectiveWeights::validate() const {
    for (double a : {alpha_q, alpha_m, alpha_t, alpha_c, alpha_r}) {
        if (!(a > 0.0)) throw config_error("objective weights must all be strictly positive");
    }
}

// ---- JSON ----------------------------------------------------------------

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) {
        j[key] = *v;
    } else {
        j[key] = nullptr;
    }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

void to_json(json& j, const Task& t) {
    j = json{{"task_id", t.task_id},
             {"level", to_string(t.level)},
             {"domain_tags", t.domain_tags},
             {"description", t.description},
             {"mission", t.mission}};
}

void from_json(const json& j, Task& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.level = parse_level(j.at("level").get<std::string>());
    t.domain_tags = j.at("domain_tags").get<std::vector<std::string>>();
    t.description = j.at("description").get<std::string>();
    t.mission = j.at("mission").get<std::string>();
}

void to_json(json& j, const AgentSpec& a) {
    j = json{{"agent_index", a.agent_index},
             {"model_id", a.model_id},
             {"temperature", a.temperature},
             {"backend_ref", a.backend_ref}};
}

void from_json(const json& j, AgentSpec& a) {
    a.agent_index = j.at("agent_index").get<int>();
    a.model_id = j.at("model_id").get<std::string>();
    a.temperature = j.value("temperature", default_agent_temperature);
    a.backend_ref = j.at("backend_ref").get<std::string>();
}

void to_json(json& j, const TokenUsage& u) {
    j = json{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

void from_json(const json& j, TokenUsage& u) {
    u.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
    u.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
}

void to_json(json& j, const TurnOutput& t) {
    j = json{{"agent_index", t.agent_index},
             {"participation", to_string(t.participation)},
             {"content", t.content},
             {"declared_dependencies", t.declared_dependencies},
             {"token_usage", t.token_usage},
             {"round", t.round}};
    put_optional(j, "role_name", t.role_name);
}

void from_json(const json& j, TurnOutput& t) {
    t.agent_index = j.at("agent_index").get<int>();
    t.role_name = get_optional<std::string>(j, "role_name");
    t.participation = parse_participation(j.at("participation").get<std::string>());
    t.content = j.at("content").get<std::string>();
    t.declared_dependencies = j.at("declared_dependencies").get<std::vector<int>>();
    t.token_usage = j.at("token_usage").get<TokenUsage>();
    t.round = j.at("round").get<int>();
}

void to_json(json& j, const JudgeScores& s) {
    j = json{{"s_acc", s.s_acc}, {"s_comp", s.s_comp}, {"s_coh", s.s_coh}, {"s_act", s.s_act}, {"s_mis", s.s_mis}};
}

void from_json(const json& j, JudgeScores& s) {
    s.s_acc = j.at("s_acc").get<int>();
    s.s_comp = j.at("s_comp").get<int>();
    s.s_coh = j.at("s_coh").get<int>();
    s.s_act = j.at("s_act").get<int>();
    s.s_mis = j.at("s_mis").get<int>();
    s.validate();
}

void to_json(json& j, const ShockSpec& s) {
    j = json{{"kind", to_string(s.kind)},
             {"at_task_index", s.at_task_index},
             {"removal_count", s.removal_count},
             {"substitute_fraction", s.substitute_fraction},
             {"replacement_model", s.replacement_model},
             {"replacement_backend", s.replacement_backend},
             {"shifted_mission", s.shifted_mission}};
}

void from_json(const json& j, ShockSpec& s) {
    s.kind = parse_shock_kind(j.at("kind").get<std::string>());
    s.at_task_index = j.at("at_task_index").get<int>();
    s.removal_count = j.value("removal_count", 1);
    s.substitute_fraction = j.value("substitute_fraction", 0.25);
    s.replacement_model = j.value("replacement_model", std::string{});
    s.replacement_backend = j.value("replacement_backend", std::string{});
    s.shifted_mission = j.value("shifted_mission", std::string{});
}

void to_json(json& j, const RunMetrics& m) {
    j = json{{"hierarchy_depth", m.hierarchy_depth},
             {"active", m.active},
             {"voluntary_abstain", m.voluntary_abstain},
             {"directed_idle", m.directed_idle},
             {"failed", m.failed},
             {"abstention_rate", m.abstention_rate},
             {"coordination_overhead", m.coordination_overhead}};
    put_optional(j, "quality", m.quality);
    put_optional(j, "mission_relevance", m.mission_relevance);
    put_optional(j, "spectral_gap", m.spectral_gap);
}

void from_json(const json& j, RunMetrics& m) {
    m.quality = get_optional<double>(j, "quality");
    m.mission_relevance = get_optional<double>(j, "mission_relevance");
    m.hierarchy_depth = j.at("hierarchy_depth").get<int>();
    m.spectral_gap = get_optional<double>(j, "spectral_gap");
    m.active = j.at("active").get<int>();
    m.voluntary_abstain = j.at("voluntary_abstain").get<int>();
    m.directed_idle = j.at("directed_idle").get<int>();
    m.failed = j.at("failed").get<int>();
    m.abstention_rate = j.at("abstention_rate").get<double>();
    m.coordination_overhead = j.at("coordination_overhead").get<double>();
}

void to_json(json& j, const RunRecord& r) {
    j = json{{"run_id", r.run_id},
             {"protocol", to_string(r.protocol)},
             {"n_agents", r.n_agents},
             {"task_id", r.task_id},
             {"level", to_string(r.level)},
             {"seed", r.seed},
             {"model_id", r.model_id},
             {"turns", r.turns},
             {"wall_time_seconds", r.wall_time_seconds},
             {"total_tokens", r.total_tokens},
             {"llm_call_count", r.llm_call_count},
             {"coordinator_usage", r.coordinator_usage},
             {"judge_usage", r.judge_usage},
             {"risk_events", r.risk_events}};
    put_optional(j, "judge", r.judge);
    put_optional(j, "judge_ref", r.judge_ref);
    put_optional(j, "shock_applied", r.shock_applied);
    put_optional(j, "metrics", r.metrics);
    put_optional(j, "error", r.error);
}

void from_json(const json& j, RunRecord& r) {
    r.run_id = j.at("run_id").get<std::string>();
    r.protocol = parse_protocol(j.at("protocol").get<std::string>());
    r.n_agents = j.at("n_agents").get<int>();
    r.task_id = j.at("task_id").get<std::string>();
    r.level = parse_level(j.at("level").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.model_id = j.value("model_id", std::string{});
    r.turns = j.at("turns").get<std::vector<TurnOutput>>();
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    r.total_tokens = j.at("total_tokens").get<std::int64_t>();
    r.llm_call_count = j.at("llm_call_count").get<int>();
    r.coordinator_usage = j.value("coordinator_usage", TokenUsage{});
    r.judge_usage = j.value("judge_usage", TokenUsage{});
    r.judge = get_optional<JudgeScores>(j, "judge");
    r.judge_ref = get_optional<std::string>(j, "judge_ref");
    r.risk_events = j.at("risk_events").get<int>();
    r.shock_applied = get_optional<ShockSpec>(j, "shock_applied");
    r.metrics = get_optional<RunMetrics>(j, "metrics");
    r.error = get_optional<std::string>(j, "error");
}

void to_json(json& j, const ObjectiveWeights& w) {
    j = json{{"alpha_q", w.alpha_q}, {"alpha_m", w.alpha_m}, {"alpha_t", w.alpha_t},
             {"alpha_c", w.alpha_c}, {"alpha_r", w.alpha_r}};
}

void from_json(const json& j, ObjectiveWeights& w) {
    // No defaults: every weight must be stated.
    w.alpha_q = j.at("alpha_q").get<double>();
    w.alpha_m = j.at("alpha_m").get<double>();
    w.alpha_t = j.at("alpha_t").get<double>();
    w.alpha_c = j.at("alpha_c").get<double>();
    w.alpha_r = j.at("alpha_r").get<double>();
    w.validate();
}

std::string to_json_line(const RunRecord& record) {
    return json(record).dump();
}

RunRecord parse_json_line(std::string_view line) {
    return json::parse(line).get<RunRecord>();
}

}  // namespace agentorg
