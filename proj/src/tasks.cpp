#include "agentorg/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "agentorg/assets.hpp"
#include "agentorg/errors.hpp"

namespace agentorg {

namespace {

const json& bundled_document() {
    static const json doc = json::parse(embedded_asset("tasks/corpus.json"));
    return doc;
}

}  // namespace

const std::vector<Task>& bundled_tasks() {
    static const std::vector<Task> tasks = parse_tasks(bundled_document());
    return tasks;
}

std::string bundled_corpus_version() { return bundled_document().value("version", std::string{"v1"}); }

std::vector<Task> parse_tasks(const json& doc) {
    const json& list = doc.is_array() ? doc : doc.at("tasks");
    if (!list.is_array()) throw config_error("task corpus: \"tasks\" must be an array");
    std::vector<Task> tasks;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < list.size(); ++i) {
        Task t;
        try {
            t = list[i].get<Task>();
            t.validate();
        } catch (const std::exception& e) {
            throw config_error("task corpus entry " + std::to_string(i) + ": " + e.what());
        }
        if (!ids.insert(t.task_id).second) throw config_error("task corpus: duplicate task_id " + t.task_id);
        tasks.push_back(std::move(t));
    }
    if (tasks.empty()) throw config_error("task corpus is empty");
    return tasks;
}

std::vector<Task> load_tasks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open task corpus " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("task corpus " + path.string() + ": " + e.what());
    }
    return parse_tasks(doc);
}

std::vector<Task> select_tasks(const std::vector<Task>& tasks, const std::vector<Level>& levels,
                               std::optional<std::size_t> per_level) {
    std::map<Level, std::size_t> taken;
    std::vector<Task> out;
    for (const auto& t : tasks) {
        if (!levels.empty() && std::find(levels.begin(), levels.end(), t.level) == levels.end()) continue;
        if (per_level && taken[t.level] >= *per_level) continue;
        ++taken[t.level];
        out.push_back(t);
    }
    return out;
}

}  // namespace agentorg
