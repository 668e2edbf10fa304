#include "agentorg/campaign.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "agentorg/concurrency.hpp"
#include "agentorg/engine.hpp"
#include "agentorg/errors.hpp"
#include "agentorg/metrics.hpp"
#include "agentorg/prompts.hpp"
#include "agentorg/shocks.hpp"
#include "agentorg/tasks.hpp"

namespace agentorg {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

[[noreturn]] void throw_violations(const std::vector<std::string>& problems) {
    throw config_error("invalid campaign config:\n  - " + join(problems, "\n  - "));
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

// Collects errors per field instead of stopping at the first one.
struct FieldReader {
    const json& doc;
    std::vector<std::string>& problems;

    template <typename Fn>
    void optional(const char* key, Fn&& fn) {
        auto it = doc.find(key);
        if (it == doc.end() || it->is_null()) return;
        try {
            fn(*it);
        } catch (const std::exception& e) {
            problems.push_back(std::string(key) + ": " + e.what());
        }
    }

    template <typename Fn>
    void required(const char* key, Fn&& fn) {
        if (!doc.contains(key) || doc.at(key).is_null()) {
            problems.push_back(std::string(key) + ": missing");
            return;
        }
        optional(key, std::forward<Fn>(fn));
    }
};

BackendConfig parse_backend(const json& j, const fs::path& base_dir) {
    BackendConfig b;
    b.ref = j.at("ref").get<std::string>();
    const auto kind = j.value("kind", std::string{"mock"});
    if (kind == "mock") {
        b.kind = BackendKind::mock;
        b.model_id = j.value("model_id", std::string{"mock"});
        b.policy = j.value("policy", json::object()).get<MockAgentPolicy>();
        b.call_delay = std::chrono::milliseconds(j.value("call_delay_ms", 0));
    } else if (kind == "remote") {
        b.kind = BackendKind::remote;
        b.remote = j.at("remote").get<RemoteConfig>();
        b.model_id = b.remote->model_id;
        if (j.contains("replay_fixtures")) {
            b.replay_fixtures = resolve(base_dir, j.at("replay_fixtures").get<std::string>());
        }
    } else {
        throw config_error("backend " + b.ref + ": unknown kind \"" + kind + "\" (mock or remote)");
    }
    return b;
}

std::vector<Task> parse_corpus(const json& j, const fs::path& base_dir, std::string& label) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "bundled") {
            label = "bundled";
            return bundled_tasks();
        }
        label = s;
        return load_tasks(resolve(base_dir, s));
    }
    if (j.is_array()) {
        label = "inline";
        return parse_tasks(j);
    }
    std::vector<Task> tasks;
    if (j.contains("tasks")) {
        label = "inline";
        tasks = parse_tasks(j.at("tasks"));
    } else if (j.contains("path")) {
        label = j.at("path").get<std::string>();
        tasks = load_tasks(resolve(base_dir, label));
    } else {
        label = "bundled";
        tasks = bundled_tasks();
    }
    std::vector<Level> levels;
    for (const auto& l : j.value("levels", json::array())) levels.push_back(parse_level(l.get<std::string>()));
    std::optional<std::size_t> per_level;
    if (j.contains("per_level")) per_level = j.at("per_level").get<std::size_t>();
    auto selected = select_tasks(tasks, levels, per_level);
    if (j.contains("limit")) {
        const auto limit = j.at("limit").get<std::size_t>();
        if (selected.size() > limit) selected.resize(limit);
    }
    return selected;
}

int removed_by(const ShockSpec& s) {
    switch (s.kind) {
        case ShockKind::remove_random: return s.removal_count;
        case ShockKind::remove_hub: return 1;
        default: return 0;
    }
}

// Appends lines in plan order. Indices already in the log are pre-marked done.
class OrderedWriter {
public:
    OrderedWriter(const fs::path& runs, const fs::path& events, std::vector<bool> done,
                  std::optional<std::size_t> stop_after)
        : runs_(runs, std::ios::app | std::ios::binary),
          events_(events, std::ios::app | std::ios::binary),
          done_(std::move(done)),
          stop_after_(stop_after) {
        if (!runs_) throw std::runtime_error("cannot open " + runs.string());
        advance();
    }

    void submit(std::size_t index, std::string record_line, std::vector<std::string> event_lines) {
        std::lock_guard lock(mutex_);
        if (stopped_) return;
        pending_[index] = {std::move(record_line), std::move(event_lines)};
        advance();
    }

    bool stopped() const {
        std::lock_guard lock(mutex_);
        return stopped_;
    }

    std::size_t written() const {
        std::lock_guard lock(mutex_);
        return written_;
    }

private:
    struct Pending {
        std::string line;
        std::vector<std::string> events;
    };

    void advance() {
        while (!stopped_ && next_ < done_.size()) {
            if (done_[next_]) {
                ++next_;
                continue;
            }
            auto it = pending_.find(next_);
            if (it == pending_.end()) return;
            for (const auto& e : it->second.events) events_ << e << '\n';
            events_.flush();
            runs_ << it->second.line << '\n';
            runs_.flush();
            pending_.erase(it);
            ++next_;
            ++written_;
            if (stop_after_ && written_ >= *stop_after_) stopped_ = true;
        }
    }

    std::ofstream runs_;
    std::ofstream events_;
    std::vector<bool> done_;
    std::optional<std::size_t> stop_after_;
    mutable std::mutex mutex_;
    std::map<std::size_t, Pending> pending_;
    std::size_t next_ = 0;
    std::size_t written_ = 0;
    bool stopped_ = false;
};

std::vector<AgentSpec> initial_agents(const CampaignConfig& config, int n) {
    const auto* backend = config.find_backend(config.agent_backend);
    const std::string model = !config.agent_model.empty() ? config.agent_model : backend ? backend->model_id : "";
    std::vector<AgentSpec> agents(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        agents[static_cast<std::size_t>(i)] = {i, model, config.agent_temperature, config.agent_backend};
    }
    return agents;
}

std::string joined_models(const std::vector<AgentSpec>& agents) {
    std::set<std::string> models;
    for (const auto& a : agents) models.insert(a.model_id);
    return join(std::vector<std::string>(models.begin(), models.end()), "+");
}

RunRecord failed_record(const RunPlan& plan, const Task& task, const std::vector<AgentSpec>& agents,
                        const std::string& why) {
    RunRecord r;
    r.run_id = plan.run_id;
    r.protocol = plan.protocol;
    r.n_agents = static_cast<int>(agents.size());
    r.task_id = task.task_id;
    r.level = task.level;
    r.seed = plan.seed;
    r.model_id = joined_models(agents);
    r.risk_events = 1;
    r.error = why;
    return r;
}

json build_manifest(const CampaignConfig& config, std::size_t plan_count, const fs::path& dir) {
    json manifest = json::object();
    {
        std::ifstream in(dir / manifest_name);
        if (in) {
            try {
                manifest = json::parse(in);
            } catch (const json::parse_error&) {
                manifest = json::object();
            }
        }
    }
    const auto now = utc_now();
    if (!manifest.contains("created_at")) manifest["created_at"] = now;
    manifest["campaign_id"] = config.campaign_id;
    manifest["last_started_at"] = now;
    std::vector<std::string> models;
    auto add_model = [&](const std::string& m) {
        if (!m.empty() && std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
    };
    add_model(config.agent_model);
    for (const auto& b : config.backends) add_model(b.model_id);
    for (const auto& s : config.shock_schedule) add_model(s.replacement_model);
    manifest["model_ids"] = models;
    json backends = json::array();
    for (const auto& b : config.backends) {
        backends.push_back({{"ref", b.ref}, {"kind", b.kind == BackendKind::mock ? "mock" : "remote"}, {"model_id", b.model_id}});
    }
    manifest["backends"] = backends;
    manifest["prompt_template_version"] = config.prompt_version;
    manifest["task_corpus"] = {{"source", config.corpus_label},
                               {"version", config.corpus_label == "bundled" ? bundled_corpus_version() : "custom"},
                               {"task_count", config.tasks.size()}};
    manifest["plan_count"] = plan_count;
    manifest["config"] = config.source;
    return manifest;
}

void write_json_file(const fs::path& path, const json& doc) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << doc.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

}  // namespace

const BackendConfig* CampaignConfig::find_backend(const std::string& ref) const {
    for (const auto& b : backends) {
        if (b.ref == ref) return &b;
    }
    return nullptr;
}

std::string lineage_id(Protocol protocol, int n_agents, std::uint64_t seed) {
    return std::string(to_string(protocol)) + "-n" + std::to_string(n_agents) + "-s" + std::to_string(seed);
}

CampaignConfig parse_campaign_config(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw config_error("campaign config must be a JSON object");
    CampaignConfig c;
    c.source = doc;
    std::vector<std::string> problems;
    FieldReader f{doc, problems};

    f.required("campaign_id", [&](const json& j) { c.campaign_id = j.get<std::string>(); });
    f.required("protocols", [&](const json& j) {
        for (const auto& p : j) c.protocols.push_back(parse_protocol(p.get<std::string>()));
    });
    f.required("agent_counts", [&](const json& j) { c.agent_counts = j.get<std::vector<int>>(); });
    f.required("seeds", [&](const json& j) { c.seeds = j.get<std::vector<std::uint64_t>>(); });
    if (doc.contains("task_corpus")) {
        f.optional("task_corpus", [&](const json& j) { c.tasks = parse_corpus(j, base_dir, c.corpus_label); });
    } else {
        c.tasks = bundled_tasks();
    }
    f.required("backends", [&](const json& j) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            try {
                c.backends.push_back(parse_backend(j[i], base_dir));
            } catch (const std::exception& e) {
                problems.push_back("backends[" + std::to_string(i) + "]: " + e.what());
            }
        }
    });
    f.optional("agents", [&](const json& j) {
        c.agent_backend = j.value("backend", std::string{});
        c.agent_model = j.value("model_id", std::string{});
        c.agent_temperature = j.value("temperature", default_agent_temperature);
    });
    if (c.agent_backend.empty() && c.backends.size() == 1) c.agent_backend = c.backends.front().ref;
    f.optional("judge", [&](const json& j) {
        if (j.is_string()) {
            const auto s = j.get<std::string>();
            if (s == "synthetic") {
                c.judge.kind = JudgeKind::synthetic;
            } else if (s == "none") {
                c.judge.kind = JudgeKind::none;
            } else {
                c.judge.kind = JudgeKind::backend;
                c.judge.backend_ref = s;
            }
            return;
        }
        const auto kind = j.value("kind", std::string{"synthetic"});
        if (kind == "synthetic") {
            c.judge.kind = JudgeKind::synthetic;
            c.judge.policy_backend = j.value("policy_backend", std::string{});
        } else if (kind == "backend") {
            c.judge.kind = JudgeKind::backend;
            c.judge.backend_ref = j.at("backend").get<std::string>();
        } else if (kind == "none") {
            c.judge.kind = JudgeKind::none;
        } else {
            throw config_error("unknown judge kind \"" + kind + "\" (synthetic, backend or none)");
        }
    });
    if (c.judge.kind == JudgeKind::synthetic && c.judge.policy_backend.empty()) c.judge.policy_backend = c.agent_backend;
    f.optional("balance_weights", [&](const json& j) { c.balance_weights = j.get<BalanceWeights>(); });
    f.optional("objective_weights", [&](const json& j) { c.objective_weights = j.get<ObjectiveWeights>(); });
    f.optional("shock_schedule", [&](const json& j) { c.shock_schedule = j.get<std::vector<ShockSpec>>(); });
    f.optional("concurrency_cap", [&](const json& j) { c.concurrency_cap = j.get<std::size_t>(); });
    f.optional("max_parallel_lineages", [&](const json& j) { c.max_parallel_lineages = j.get<std::size_t>(); });
    f.optional("max_parallel_calls", [&](const json& j) { c.max_parallel_calls = j.get<std::size_t>(); });
    f.required("output_dir", [&](const json& j) { c.output_dir = resolve(base_dir, j.get<std::string>()); });
    f.optional("prompts_dir", [&](const json& j) { c.prompts_dir = resolve(base_dir, j.get<std::string>()); });
    f.optional("prompt_version", [&](const json& j) { c.prompt_version = j.get<std::string>(); });

    for (auto& p : campaign_violations(c)) problems.push_back(std::move(p));
    if (!problems.empty()) throw_violations(problems);
    return c;
}

CampaignConfig load_campaign_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_campaign_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::vector<std::string> campaign_violations(const CampaignConfig& c) {
    std::vector<std::string> v;
    if (c.campaign_id.empty()) v.push_back("campaign_id must not be empty");
    if (c.campaign_id.find_first_of(" /\\\t\n") != std::string::npos) {
        v.push_back("campaign_id must not contain whitespace or slashes");
    }
    if (c.protocols.empty()) v.push_back("protocols must not be empty");
    if (std::set<Protocol>(c.protocols.begin(), c.protocols.end()).size() != c.protocols.size()) {
        v.push_back("protocols contains duplicates");
    }
    if (c.agent_counts.empty()) v.push_back("agent_counts must not be empty");
    if (std::set<int>(c.agent_counts.begin(), c.agent_counts.end()).size() != c.agent_counts.size()) {
        v.push_back("agent_counts contains duplicates");
    }
    for (int n : c.agent_counts) {
        if (n < 1) v.push_back("agent_counts: N = " + std::to_string(n) + " is not positive");
    }
    if (c.seeds.empty()) v.push_back("seeds must not be empty");
    if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
        v.push_back("seeds contains duplicates");
    }
    if (c.tasks.empty()) v.push_back("task corpus selects no tasks");
    if (c.concurrency_cap < 1) v.push_back("concurrency_cap must be >= 1");
    if (c.max_parallel_lineages < 1) v.push_back("max_parallel_lineages must be >= 1");
    if (c.max_parallel_calls < 1) v.push_back("max_parallel_calls must be >= 1");
    if (c.output_dir.empty()) v.push_back("output_dir must not be empty");
    if (!(c.agent_temperature >= 0.0 && c.agent_temperature <= 2.0)) v.push_back("agents.temperature must be in [0, 2]");

    std::set<std::string> refs;
    for (const auto& b : c.backends) {
        if (b.ref.empty()) v.push_back("backend with empty ref");
        if (!refs.insert(b.ref).second) v.push_back("duplicate backend ref " + b.ref);
    }
    if (c.backends.empty()) v.push_back("backends must not be empty");
    if (c.agent_backend.empty()) {
        v.push_back("agents.backend must name a backend");
    } else if (!c.find_backend(c.agent_backend)) {
        v.push_back("agents.backend \"" + c.agent_backend + "\" is not a configured backend");
    }

    const auto* agent_backend = c.find_backend(c.agent_backend);
    const std::string agent_model =
        !c.agent_model.empty() ? c.agent_model : agent_backend ? agent_backend->model_id : std::string{};
    switch (c.judge.kind) {
        case JudgeKind::synthetic: {
            const auto* p = c.find_backend(c.judge.policy_backend);
            if (!p) {
                v.push_back("judge.policy_backend \"" + c.judge.policy_backend + "\" is not a configured backend");
            } else if (p->kind != BackendKind::mock) {
                v.push_back("synthetic judge needs a mock policy backend, \"" + p->ref + "\" is remote");
            }
            break;
        }
        case JudgeKind::backend: {
            const auto* j = c.find_backend(c.judge.backend_ref);
            if (!j) {
                v.push_back("judge backend \"" + c.judge.backend_ref + "\" is not a configured backend");
                break;
            }
            if (j->kind != BackendKind::remote) v.push_back("judge backend \"" + j->ref + "\" must be a remote backend");
            if (j->ref == c.agent_backend) v.push_back("judge backend \"" + j->ref + "\" is also the agents' backend");
            if (j->model_id == agent_model) v.push_back("judge model \"" + j->model_id + "\" is also the agents' model");
            for (const auto& s : c.shock_schedule) {
                if (s.replacement_backend == j->ref) v.push_back("judge backend is a shock replacement backend");
                if (s.replacement_model == j->model_id) v.push_back("judge model is a shock replacement model");
            }
            break;
        }
        case JudgeKind::none: break;
    }

    BalanceWeights bw = c.balance_weights;
    try {
        bw.validate();
    } catch (const std::exception& e) {
        v.push_back(std::string("balance_weights: ") + e.what());
    }
    if (c.objective_weights) {
        try {
            c.objective_weights->validate();
        } catch (const std::exception& e) {
            v.push_back(std::string("objective_weights: ") + e.what());
        }
    }

    const int length = static_cast<int>(c.tasks.size());
    std::set<int> shock_indices;
    for (std::size_t i = 0; i < c.shock_schedule.size(); ++i) {
        const auto& s = c.shock_schedule[i];
        const std::string where = "shock_schedule[" + std::to_string(i) + "]: ";
        try {
            validate_shock(s, length);
        } catch (const std::exception& e) {
            v.push_back(where + e.what());
        }
        if (!shock_indices.insert(s.at_task_index).second) {
            v.push_back(where + "a second shock at task index " + std::to_string(s.at_task_index));
        }
        if (!s.replacement_backend.empty() && !c.find_backend(s.replacement_backend)) {
            v.push_back(where + "replacement_backend \"" + s.replacement_backend + "\" is not a configured backend");
        }
    }
    int removed = 0;
    for (const auto& s : c.shock_schedule) removed += removed_by(s);
    for (Protocol p : c.protocols) {
        for (int n : c.agent_counts) {
            const int floor = p == Protocol::coordinator ? 2 : 1;
            if (n < floor) {
                v.push_back(std::string(to_string(p)) + " needs N >= " + std::to_string(floor) + ", got N = " +
                            std::to_string(n));
            } else if (n - removed < floor) {
                v.push_back("shock_schedule removes " + std::to_string(removed) + " agents, leaving " +
                            std::to_string(n - removed) + " for " + std::string(to_string(p)) + " N = " +
                            std::to_string(n));
            }
        }
    }
    return v;
}

std::vector<RunPlan> expand_grid(const CampaignConfig& config) {
    if (auto problems = campaign_violations(config); !problems.empty()) throw_violations(problems);
    std::map<int, ShockSpec> shocks;
    for (const auto& s : config.shock_schedule) shocks.emplace(s.at_task_index, s);

    std::vector<RunPlan> plans;
    plans.reserve(config.protocols.size() * config.agent_counts.size() * config.tasks.size() * config.seeds.size());
    char task_tag[16];
    for (Protocol protocol : config.protocols) {
        const std::string prefix = config.campaign_id + "-" + std::string(to_string(protocol)) + "-n";
        for (int n : config.agent_counts) {
            for (std::size_t t = 0; t < config.tasks.size(); ++t) {
                const Task& task = config.tasks[t];
                std::snprintf(task_tag, sizeof task_tag, "-t%03zu-", t);
                const auto shock = shocks.find(static_cast<int>(t));
                for (std::uint64_t seed : config.seeds) {
                    RunPlan p;
                    p.index = plans.size();
                    p.run_id = prefix + std::to_string(n) + "-s" + std::to_string(seed) + task_tag + task.task_id;
                    p.protocol = protocol;
                    p.n_agents = n;
                    p.task_index = t;
                    p.task = &task;
                    p.seed = seed;
                    if (shock != shocks.end()) p.shock = shock->second;
                    p.lineage = lineage_id(protocol, n, seed);
                    plans.push_back(std::move(p));
                }
            }
        }
    }
    return plans;
}

BackendRegistry build_registry(const CampaignConfig& config) {
    BackendRegistry registry;
    const bool any_remote = std::any_of(config.backends.begin(), config.backends.end(),
                                        [](const BackendConfig& b) { return b.kind == BackendKind::remote; });
    PromptSet prompts;
    if (any_remote) {
        prompts = config.prompts_dir ? PromptSet::from_directory(*config.prompts_dir, config.prompt_version)
                                     : PromptSet::builtin();
    }
    for (const auto& b : config.backends) {
        if (b.kind == BackendKind::mock) {
            registry.add(b.ref, std::make_shared<MockBackend>(b.policy, b.call_delay), b.model_id);
            continue;
        }
        std::shared_ptr<Transport> transport;
        if (b.replay_fixtures) {
            transport = std::make_shared<FixtureTransport>(load_fixtures(*b.replay_fixtures));
        } else {
            transport = std::make_shared<HttplibTransport>();
        }
        auto client = std::make_shared<RemoteClient>(*b.remote, transport);
        registry.add(b.ref, BackendRegistry::Entry{std::make_shared<LlmAgentBackend>(client, prompts), client, b.model_id});
    }
    if (config.judge.kind == JudgeKind::backend) registry.set_default_judge(config.judge.backend_ref);
    return registry;
}

std::vector<RunRecord> read_run_log(const fs::path& path) {
    std::vector<RunRecord> records;
    std::ifstream in(path, std::ios::binary);
    if (!in) return records;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t start = 0;
    while (start < content.size()) {
        const auto end = content.find('\n', start);
        if (end == std::string::npos) break;  // partial trailing line
        const std::string_view line(content.data() + start, end - start);
        if (!line.empty()) records.push_back(parse_json_line(line));
        start = end + 1;
    }
    return records;
}

CampaignResult execute_campaign(const CampaignConfig& config, const ExecuteOptions& options) {
    const auto plans = expand_grid(config);
    std::shared_ptr<BackendRegistry> registry = options.registry;
    if (!registry) registry = std::make_shared<BackendRegistry>(build_registry(config));

    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    const fs::path runs_path = dir / runs_log_name;

    // Recover the log: keep complete lines, drop a partial tail left by a crash.
    std::map<std::string, RunRecord> logged;
    if (fs::exists(runs_path)) {
        std::ifstream in(runs_path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        std::size_t keep = 0;
        std::size_t start = 0;
        while (start < content.size()) {
            const auto end = content.find('\n', start);
            if (end == std::string::npos) break;
            const std::string_view line(content.data() + start, end - start);
            if (!line.empty()) {
                try {
                    auto r = parse_json_line(line);
                    logged.emplace(r.run_id, std::move(r));
                } catch (const std::exception&) {
                    break;  // corrupt line: truncate from here
                }
            }
            keep = end + 1;
            start = end + 1;
        }
        if (keep != content.size()) fs::resize_file(runs_path, keep);
    }

    CampaignResult result;
    result.results_dir = dir;
    result.planned = plans.size();

    write_json_file(dir / manifest_name, build_manifest(config, plans.size(), dir));

    std::vector<bool> done(plans.size(), false);
    for (const auto& p : plans) {
        if (logged.count(p.run_id)) {
            done[p.index] = true;
            ++result.skipped;
        }
    }

    // Lineages in first-appearance order, each holding its plans in task order.
    std::vector<std::string> lineage_order;
    std::map<std::string, std::vector<const RunPlan*>> lineages;
    for (const auto& p : plans) {
        auto& list = lineages[p.lineage];
        if (list.empty()) lineage_order.push_back(p.lineage);
        list.push_back(&p);
    }

    OrderedWriter writer(runs_path, dir / events_log_name, done, options.stop_after_runs);
    CallGate gate(config.concurrency_cap);
    std::mutex result_mutex;
    std::mutex callback_mutex;

    const MockAgentPolicy* judge_policy = nullptr;
    if (config.judge.kind == JudgeKind::synthetic) {
        if (const auto* b = config.find_backend(config.judge.policy_backend)) judge_policy = &b->policy;
    }
    JudgeBinding judge_binding;
    PromptTemplate rubric;
    if (config.judge.kind == JudgeKind::backend) {
        judge_binding = {config.judge.backend_ref, registry->at(config.judge.backend_ref).completer.get()};
        if (!judge_binding.completer) throw config_error("judge backend " + config.judge.backend_ref + " cannot complete text");
        rubric = config.prompts_dir ? PromptSet::from_directory(*config.prompts_dir, config.prompt_version).judge_rubric
                                    : PromptSet::builtin().judge_rubric;
    }

    parallel_for(lineage_order.size(), config.max_parallel_lineages, [&](std::size_t li) {
        const auto& list = lineages.at(lineage_order[li]);
        std::vector<AgentSpec> agents = initial_agents(config, list.front()->n_agents);
        OrgMemory memory;
        std::optional<std::string> mission;
        std::optional<RunRecord> previous;

        for (const RunPlan* plan : list) {
            if (writer.stopped()) return;
            std::vector<std::string> events;

            if (plan->shock) {
                const InteractionGraph graph = previous && previous->n_agents == static_cast<int>(agents.size())
                                                   ? InteractionGraph::from_record(*previous)
                                                   : InteractionGraph{static_cast<int>(agents.size()), {}};
                try {
                    auto outcome = apply_shock(*plan->shock, agents, graph, RngKey{plan->seed, plan->run_id, -2, 0});
                    const bool renumbered = outcome.agents.size() != agents.size();
                    agents = std::move(outcome.agents);
                    if (renumbered) memory.remap(outcome.index_map);
                    if (outcome.mission) mission = outcome.mission;
                    events.push_back(json{{"run_id", plan->run_id},
                                          {"lineage", plan->lineage},
                                          {"shock", *plan->shock},
                                          {"affected_agents", outcome.affected},
                                          {"agents_after", agents.size()}}
                                         .dump());
                } catch (const std::exception& e) {
                    events.push_back(json{{"run_id", plan->run_id}, {"lineage", plan->lineage}, {"shock", *plan->shock},
                                          {"error", e.what()}}
                                         .dump());
                }
            }

            Task task = *plan->task;
            if (mission) task.mission = *mission;

            if (auto it = logged.find(plan->run_id); it != logged.end()) {
                if (plan->protocol == Protocol::shared && !it->second.error) append_run_to_memory(memory, it->second);
                previous = it->second;
                continue;
            }

            RunRecord record;
            try {
                RunSetup setup{plan->run_id, plan->seed, task, agents,
                               EngineOptions{config.max_parallel_calls, &gate}};
                record = run_protocol(plan->protocol, setup, *registry, memory);
                record.task_id = task.task_id;
                if (plan->shock) record.shock_applied = plan->shock;

                if (config.judge.kind == JudgeKind::synthetic && judge_policy) {
                    record.judge = synthetic_judge(record, *judge_policy);
                    record.judge_ref = "synthetic";
                } else if (config.judge.kind == JudgeKind::backend) {
                    CallGate::Permit permit(&gate);
                    auto outcome = judge_solution(record, task, agents, judge_binding, rubric);
                    record.judge = outcome.scores;
                    record.judge_usage = outcome.usage;
                    record.judge_ref = judge_binding.ref;
                    record.risk_events += outcome.risk_events;
                }
                if (hierarchy_depth_detail(record).cycle_removed) ++record.risk_events;
                record.metrics = compute_run_metrics(record);
                record.total_tokens = record.summed_tokens();
            } catch (const std::exception& e) {
                record = failed_record(*plan, task, agents, e.what());
                if (plan->shock) record.shock_applied = plan->shock;
            }

            {
                std::lock_guard lock(result_mutex);
                ++result.executed;
                if (record.error) ++result.failed;
            }
            if (options.on_record) {
                std::lock_guard lock(callback_mutex);
                options.on_record(record);
            }
            writer.submit(plan->index, to_json_line(record), std::move(events));
            previous = std::move(record);
        }
    });

    result.interrupted = writer.stopped();
    if (result.interrupted) {
        result.executed = writer.written();
    }
    auto manifest = build_manifest(config, plans.size(), dir);
    if (result.interrupted) {
        manifest.erase("finished_at");
    } else {
        manifest["finished_at"] = utc_now();
    }
    manifest["runs_logged"] = result.skipped + writer.written();
    write_json_file(dir / manifest_name, manifest);
    return result;
}

}  // namespace agentorg
