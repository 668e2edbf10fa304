#include "agentorg/remote.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include "agentorg/errors.hpp"

namespace agentorg {

// ---- fixtures --------------------------------------------------------------

namespace {

json request_key(const HttpRequest& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) body = req.body;
    return json{{"url", req.url}, {"body", body}};
}

json response_json(const HttpResponse& r) {
    json j{{"status", r.status}, {"body", r.body}};
    if (!r.error.empty()) j["error"] = r.error;
    if (r.retry_after_seconds) j["retry_after_seconds"] = *r.retry_after_seconds;
    return j;
}

HttpResponse response_from(const json& j) {
    HttpResponse r;
    r.status = j.at("status").get<int>();
    const auto& body = j.at("body");
    r.body = body.is_string() ? body.get<std::string>() : body.dump();
    r.error = j.value("error", std::string{});
    if (j.contains("retry_after_seconds")) r.retry_after_seconds = j.at("retry_after_seconds").get<double>();
    return r;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<bool> as_flag(const json& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number()) return v.get<double>() != 0.0;
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == "true" || s == "yes" || s == "y" || s == "1") return true;
        if (s == "false" || s == "no" || s == "n" || s == "0") return false;
    }
    return std::nullopt;
}

std::vector<int> digits_in(std::string_view s) {
    std::vector<int> out;
    static const std::regex number(R"(\d+)");
    std::string str(s);
    for (auto it = std::sregex_iterator(str.begin(), str.end(), number); it != std::sregex_iterator(); ++it) {
        out.push_back(std::stoi(it->str()));
    }
    return out;
}

// Largest {...} span that parses as JSON.
std::optional<json> embedded_json(std::string_view text, char open = '{', char close = '}') {
    const auto last = text.rfind(close);
    if (last == std::string_view::npos) return std::nullopt;
    for (auto pos = text.find(open); pos != std::string_view::npos && pos < last; pos = text.find(open, pos + 1)) {
        auto parsed = json::parse(text.substr(pos, last - pos + 1), nullptr, false);
        if (!parsed.is_discarded()) return parsed;
    }
    return std::nullopt;
}

std::optional<Envelope> envelope_from_json(const json& j) {
    if (!j.is_object()) return std::nullopt;
    Envelope e;
    bool any = false;
    if (auto it = j.find("role"); it != j.end() && it->is_string() && !it->get<std::string>().empty()) {
        e.role = trim(it->get<std::string>());
        any = true;
    }
    if (auto it = j.find("participate"); it != j.end()) {
        if (auto flag = as_flag(*it)) {
            e.participate = *flag;
            any = true;
        }
    }
    for (const char* key : {"depends_on", "dependencies", "builds_on"}) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_array()) continue;
        for (const auto& d : *it) {
            if (d.is_number_integer()) {
                e.depends_on.push_back(d.get<int>());
            } else if (d.is_string()) {
                for (int v : digits_in(d.get<std::string>())) e.depends_on.push_back(v);
            }
        }
        break;
    }
    if (auto it = j.find("content"); it != j.end()) {
        e.content = it->is_string() ? it->get<std::string>() : it->dump();
        any = any || !e.content.empty();
    }
    if (!any) return std::nullopt;
    return e;
}

std::optional<std::string> line_value(const std::string& text, const char* key) {
    const std::regex re(std::string(R"((?:^|\n)[ \t*#\-]*)") + key + R"([ \t*]*[:=][ \t]*([^\n]*))",
                        std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, re)) return trim(m[1].str());
    return std::nullopt;
}

}  // namespace

std::vector<FixtureExchange> load_fixtures(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read fixture file " + path.string());
    const json j = json::parse(in);
    std::vector<FixtureExchange> out;
    for (const auto& e : j.at("exchanges")) {
        out.push_back(FixtureExchange{e.at("request"), response_from(e.at("response"))});
    }
    return out;
}

void save_fixtures(const std::filesystem::path& path, const std::vector<FixtureExchange>& exchanges) {
    json list = json::array();
    for (const auto& e : exchanges) list.push_back(json{{"request", e.request}, {"response", response_json(e.response)}});
    std::ofstream out(path);
    out << json{{"exchanges", list}}.dump(2) << "\n";
}

FixtureTransport::FixtureTransport(std::vector<FixtureExchange> exchanges, bool strict)
    : exchanges_(std::move(exchanges)), strict_(strict) {}

HttpResponse FixtureTransport::post(const HttpRequest& request) {
    std::lock_guard lock(mutex_);
    if (exchanges_.empty()) return HttpResponse{599, "", "fixture set is empty", std::nullopt};
    const auto& ex = exchanges_[next_ % exchanges_.size()];
    ++next_;
    if (strict_ && request_key(request).at("body") != ex.request.at("body")) {
        return HttpResponse{599, "", "request does not match fixture", std::nullopt};
    }
    return ex.response;
}

std::size_t FixtureTransport::replayed() const {
    std::lock_guard lock(mutex_);
    return next_;
}

HttpResponse RecordingTransport::post(const HttpRequest& request) {
    auto response = inner_->post(request);
    std::lock_guard lock(mutex_);
    exchanges_.push_back(FixtureExchange{request_key(request), response});
    return response;
}

std::vector<FixtureExchange> RecordingTransport::exchanges() const {
    std::lock_guard lock(mutex_);
    return exchanges_;
}

// ---- client ----------------------------------------------------------------

void RemoteConfig::validate() const {
    if (base_url.empty()) throw config_error("remote backend: base_url is required");
    if (model_id.empty()) throw config_error("remote backend: model_id is required");
    if (max_retries < 0) throw config_error("remote backend: max_retries must be >= 0");
    if (timeout.count() <= 0) throw config_error("remote backend: timeout must be positive");
    if (concurrency_cap == 0) throw config_error("remote backend: concurrency_cap must be >= 1");
}

void to_json(json& j, const RemoteConfig& c) {
    j = json{{"base_url", c.base_url},
             {"model_id", c.model_id},
             {"api_key_env", c.api_key_env},
             {"timeout_ms", c.timeout.count()},
             {"max_retries", c.max_retries},
             {"backoff_base_ms", c.backoff_base.count()},
             {"backoff_max_ms", c.backoff_max.count()},
             {"concurrency_cap", c.concurrency_cap},
             {"requests_per_minute", c.requests_per_minute}};
}

void from_json(const json& j, RemoteConfig& c) {
    c.base_url = j.at("base_url").get<std::string>();
    c.model_id = j.at("model_id").get<std::string>();
    c.api_key_env = j.value("api_key_env", std::string{});
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60000));
    c.max_retries = j.value("max_retries", 5);
    c.backoff_base = std::chrono::milliseconds(j.value("backoff_base_ms", 500));
    c.backoff_max = std::chrono::milliseconds(j.value("backoff_max_ms", 30000));
    c.concurrency_cap = j.value("concurrency_cap", std::size_t{8});
    c.requests_per_minute = j.value("requests_per_minute", 0.0);
    c.validate();
}

bool is_retryable(const HttpResponse& r) {
    return r.status == 0 || r.status == 408 || r.status == 409 || r.status == 429 || r.status >= 500;
}

RemoteClient::RemoteClient(RemoteConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      bucket_(config_.requests_per_minute / 60.0, std::max(1.0, config_.requests_per_minute / 60.0)),
      gate_(config_.concurrency_cap) {
    config_.validate();
    if (!transport_) throw config_error("remote backend: no transport");
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key) {
            throw config_error("remote backend: environment variable " + config_.api_key_env + " is not set");
        }
        api_key_ = key;
    }
}

std::chrono::milliseconds RemoteClient::backoff_delay(int retry, const HttpResponse& last) const {
    const int shift = std::clamp(retry - 1, 0, 30);
    auto delay = config_.backoff_base * (std::int64_t{1} << shift);
    if (delay > config_.backoff_max) delay = config_.backoff_max;
    if (last.retry_after_seconds) {
        const auto hinted = std::chrono::milliseconds(static_cast<std::int64_t>(*last.retry_after_seconds * 1000.0));
        delay = std::max(delay, std::min(hinted, config_.backoff_max));
    }
    return std::max(delay, config_.backoff_base);
}

CompletionResult RemoteClient::complete(const CompletionRequest& request) {
    json body{{"model", request.model_id.empty() ? config_.model_id : request.model_id},
              {"temperature", request.temperature},
              {"messages", json::array({json{{"role", "system"}, {"content", request.system_prompt}},
                                        json{{"role", "user"}, {"content", request.user_prompt}}})}};
    HttpRequest http;
    http.url = config_.base_url + "/chat/completions";
    http.headers["Content-Type"] = "application/json";
    if (!api_key_.empty()) http.headers["Authorization"] = "Bearer " + api_key_;
    http.body = body.dump();
    http.timeout = config_.timeout;

    CompletionResult result;
    HttpResponse last;
    for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
        if (attempt > 1) sleeper_(backoff_delay(attempt - 1, last));
        bucket_.take();
        {
            CallGate::Permit permit(&gate_);
            last = transport_->post(http);
        }
        result.attempts = attempt;
        if (last.status >= 200 && last.status < 300) {
            const json reply = json::parse(last.body, nullptr, false);
            result.ok = true;
            if (reply.is_object() && reply.contains("choices") && !reply["choices"].empty()) {
                const auto& msg = reply["choices"][0].value("message", json::object());
                const auto content = msg.value("content", json());
                result.text = content.is_string() ? content.get<std::string>() : std::string{};
                if (reply.contains("usage") && reply["usage"].is_object()) {
                    result.usage.prompt_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
                    result.usage.completion_tokens = reply["usage"].value("completion_tokens", std::int64_t{0});
                }
            } else {
                result.text = last.body;
            }
            return result;
        }
        if (!is_retryable(last)) break;
    }
    result.ok = false;
    result.error = "HTTP " + std::to_string(last.status) + (last.error.empty() ? "" : ": " + last.error) +
                   " after " + std::to_string(result.attempts) + " attempt(s)";
    return result;
}

// ---- parsing ---------------------------------------------------------------

std::optional<Envelope> parse_envelope(std::string_view text) {
    if (auto j = embedded_json(text)) {
        if (auto e = envelope_from_json(*j)) return e;
    }
    const std::string s(text);
    Envelope e;
    bool any = false;
    if (auto role = line_value(s, "role")) {
        if (!role->empty()) {
            e.role = *role;
            any = true;
        }
    }
    if (auto p = line_value(s, "participate")) {
        if (auto flag = as_flag(json(*p))) {
            e.participate = *flag;
            any = true;
        }
    }
    if (auto d = line_value(s, "depends_on")) e.depends_on = digits_in(*d);
    static const std::regex content_re(R"((?:^|\n)[ \t*#\-]*content[ \t*]*[:=][ \t]*([\s\S]*))", std::regex::icase);
    std::smatch m;
    if (std::regex_search(s, m, content_re)) {
        e.content = trim(m[1].str());
        any = any || !e.content.empty();
    }
    if (!any) return std::nullopt;
    return e;
}

std::optional<std::map<int, Directive>> parse_plan(std::string_view text, int n_agents) {
    std::map<int, Directive> out;
    auto take = [&](const json& a) {
        if (!a.is_object() || !a.contains("agent")) return;
        int idx = -1;
        if (a["agent"].is_number_integer()) {
            idx = a["agent"].get<int>();
        } else if (a["agent"].is_string()) {
            auto ds = digits_in(a["agent"].get<std::string>());
            if (!ds.empty()) idx = ds.front();
        }
        if (idx < 0 || idx >= n_agents) return;
        Directive d;
        d.assigned_role = a.value("role", std::string(fallback_role));
        d.phase = a.value("phase", std::string("execution"));
        d.participate = a.contains("participate") ? as_flag(a["participate"]).value_or(true) : true;
        out[idx] = std::move(d);
    };
    if (auto j = embedded_json(text)) {
        if (j->is_object() && j->contains("assignments") && (*j)["assignments"].is_array()) {
            for (const auto& a : (*j)["assignments"]) take(a);
        }
    }
    if (out.empty()) {
        if (auto arr = embedded_json(text, '[', ']'); arr && arr->is_array()) {
            for (const auto& a : *arr) take(a);
        }
    }
    if (out.empty()) {
        static const std::regex line(
            R"(agent\s*(\d+)\s*[:\-]\s*([^|\n]+)\|\s*([^|\n]+)\|\s*(yes|no|true|false))", std::regex::icase);
        const std::string s(text);
        for (auto it = std::sregex_iterator(s.begin(), s.end(), line); it != std::sregex_iterator(); ++it) {
            const int idx = std::stoi((*it)[1].str());
            if (idx < 0 || idx >= n_agents) continue;
            out[idx] = Directive{trim((*it)[2].str()), trim((*it)[3].str()),
                                 as_flag(json(trim((*it)[4].str()))).value_or(true)};
        }
    }
    if (out.empty()) return std::nullopt;
    return out;
}

LlmAgentBackend::LlmAgentBackend(std::shared_ptr<TextCompleter> completer, PromptSet prompts)
    : completer_(std::move(completer)), prompts_(std::move(prompts)) {
    if (!completer_) throw config_error("llm backend: no completer");
}

AgentReply LlmAgentBackend::respond(const AgentRequest& request) {
    const auto values = prompt_values(request);
    CompletionRequest creq;
    creq.model_id = request.agent.model_id;
    creq.temperature = request.agent.temperature;
    creq.system_prompt = prompts_.system.render(values);
    creq.user_prompt = prompts_.for_kind(request.kind).render(values);

    const auto completion = completer_->complete(creq);
    if (!completion.ok) {
        auto failed = AgentReply::failure(completion.error);
        failed.usage = completion.usage;
        return failed;
    }

    AgentReply reply;
    reply.usage = completion.usage;
    if (request.kind == CallKind::plan) {
        reply.role = "coordinator";
        reply.content = completion.text;
        if (auto plan = parse_plan(completion.text, request.n_agents)) reply.directives = std::move(*plan);
        return reply;
    }
    if (auto env = parse_envelope(completion.text)) {
        reply.role = env->role;
        reply.participate = env->participate;
        reply.dependencies = std::move(env->depends_on);
        reply.content = env->participate ? env->content : std::string{};
        if (env->participate && reply.content.empty()) {
            reply.content = trim(completion.text);
            ++reply.risk_events;
        }
        return reply;
    }
    reply.role = fallback_role;
    reply.participate = true;
    reply.content = trim(completion.text);
    if (reply.content.empty()) reply.content = "(empty response)";
    reply.risk_events = 1;
    return reply;
}

}  // namespace agentorg
