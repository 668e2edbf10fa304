#include "agentorg/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "agentorg/assets.hpp"
#include "agentorg/errors.hpp"

namespace agentorg {

std::string_view embedded_asset(std::string_view name) {
    for (const auto& a : embedded_assets()) {
        if (a.name == name) return a.content;
    }
    throw std::out_of_range("no embedded asset named '" + std::string(name) + "'");
}

namespace {

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls fn(begin, end, name) for every {name} occurrence.
template <typename Fn>
void scan_placeholders(const std::string& text, Fn&& fn) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < text.size() && is_placeholder_char(text[j])) ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            fn(i, j + 1, text.substr(i + 1, j - i - 1));
            i = j;
        }
    }
}

const char* template_files[] = {"system", "coordinator_plan", "coordinator_work", "sequential",
                                "broadcast_intention", "broadcast_final", "shared", "judge_rubric"};

}  // namespace

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return PromptTemplate(path.stem().string(), ss.str());
}

PromptTemplate PromptTemplate::embedded(const std::string& asset_name) {
    return PromptTemplate(asset_name, std::string(embedded_asset("prompts/" + asset_name + ".txt")));
}

std::set<std::string> PromptTemplate::placeholders() const {
    std::set<std::string> names;
    scan_placeholders(text_, [&](std::size_t, std::size_t, std::string name) { names.insert(std::move(name)); });
    return names;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    std::size_t copied = 0;
    std::string unbound;
    scan_placeholders(text_, [&](std::size_t begin, std::size_t end, const std::string& name) {
        auto it = values.find(name);
        if (it == values.end()) {
            unbound += (unbound.empty() ? "" : ", ") + name;
            return;
        }
        out.append(text_, copied, begin - copied);
        out += it->second;
        copied = end;
    });
    if (!unbound.empty()) throw config_error("template '" + name_ + "' has unbound placeholders: " + unbound);
    out.append(text_, copied, std::string::npos);
    return out;
}

PromptSet PromptSet::builtin() {
    PromptSet s;
    s.system = PromptTemplate::embedded("system");
    s.plan = PromptTemplate::embedded("coordinator_plan");
    s.work = PromptTemplate::embedded("coordinator_work");
    s.sequential = PromptTemplate::embedded("sequential");
    s.intention = PromptTemplate::embedded("broadcast_intention");
    s.final_decision = PromptTemplate::embedded("broadcast_final");
    s.shared = PromptTemplate::embedded("shared");
    s.judge_rubric = PromptTemplate::embedded("judge_rubric");
    return s;
}

PromptSet PromptSet::from_directory(const std::filesystem::path& dir, std::string version) {
    PromptSet s = builtin();
    PromptTemplate* slots[] = {&s.system, &s.plan, &s.work, &s.sequential,
                               &s.intention, &s.final_decision, &s.shared, &s.judge_rubric};
    for (std::size_t i = 0; i < std::size(template_files); ++i) {
        const auto path = dir / (std::string(template_files[i]) + ".txt");
        if (std::filesystem::exists(path)) *slots[i] = PromptTemplate::from_file(path);
    }
    s.version = std::move(version);
    return s;
}

const PromptTemplate& PromptSet::for_kind(CallKind kind) const {
    switch (kind) {
        case CallKind::plan: return plan;
        case CallKind::work: return work;
        case CallKind::sequential: return sequential;
        case CallKind::intention: return intention;
        case CallKind::final_decision: return final_decision;
        case CallKind::shared: return shared;
    }
    return sequential;
}

std::string format_outputs(const std::vector<TurnOutput>& outputs) {
    if (outputs.empty()) return "(none)";
    std::string s;
    for (const auto& t : outputs) {
        s += "- agent " + std::to_string(t.agent_index) + ": ";
        if (t.contributed()) {
            s += "[" + t.role_name.value_or(fallback_role) + "] " + t.content;
        } else {
            s += std::string("(") + std::string(to_string(t.participation)) + ")";
        }
        s += "\n";
    }
    return s;
}

std::string format_intentions(const std::vector<Intention>& intentions) {
    if (intentions.empty()) return "(none)";
    std::string s;
    for (const auto& i : intentions) s += "- agent " + std::to_string(i.agent_index) + ": " + i.role_name + "\n";
    return s;
}

std::string format_memory(const OrgMemory& memory) {
    if (memory.empty()) return "(no previous tasks)";
    std::string s;
    for (const auto& [agent, entries] : memory.by_agent()) {
        s += "- agent " + std::to_string(agent) + ":";
        for (const auto& e : entries) s += " " + e.task_id + "=" + e.role.value_or("abstain");
        s += "\n";
    }
    return s;
}

std::string format_directive(const Directive& d) {
    return "role: " + d.assigned_role + "; phase: " + d.phase + "; participate: " + (d.participate ? "yes" : "no");
}

std::map<std::string, std::string> prompt_values(const AgentRequest& req) {
    const auto& ctx = req.context;
    std::string domains;
    for (const auto& t : ctx.task.domain_tags) domains += (domains.empty() ? "" : ", ") + t;
    return {
        {"mission", ctx.mission},
        {"task", ctx.task.description},
        {"level", std::string(to_string(ctx.task.level))},
        {"domains", domains},
        {"agent_index", std::to_string(req.agent.agent_index)},
        {"n_agents", std::to_string(req.n_agents)},
        {"last_agent_index", std::to_string(req.n_agents - 1)},
        {"predecessor_outputs", format_outputs(ctx.visible_outputs)},
        {"intentions", format_intentions(ctx.visible_intentions)},
        {"memory", ctx.memory_view ? format_memory(*ctx.memory_view) : "(not available)"},
        {"directive", ctx.coordinator_directive ? format_directive(*ctx.coordinator_directive) : "(none)"},
    };
}

}  // namespace agentorg
