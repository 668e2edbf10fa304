#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentorg/backend.hpp"
#include "agentorg/concurrency.hpp"
#include "agentorg/prompts.hpp"

namespace agentorg {

struct HttpRequest {
    std::string url;
    std::map<std::string, std::string> headers;
    std::string body;
    std::chrono::milliseconds timeout{60000};
};

// status == 0 means the request never got an HTTP answer (connect error, timeout).
struct HttpResponse {
    int status = 0;
    std::string body;
    std::string error;
    std::optional<double> retry_after_seconds;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

// cpp-httplib client. Thread-safe: each call opens its own connection.
class HttplibTransport final : public Transport {
public:
    HttpResponse post(const HttpRequest& request) override;
};

// Request/response pairs, as saved by RecordingTransport.
struct FixtureExchange {
    json request;  // {"url": ..., "body": <parsed JSON body>}
    HttpResponse response;
};

std::vector<FixtureExchange> load_fixtures(const std::filesystem::path& path);
void save_fixtures(const std::filesystem::path& path, const std::vector<FixtureExchange>& exchanges);

// Replays responses in recorded order. In strict mode the outgoing body must equal the
// recorded one, otherwise a 599 response is returned.
class FixtureTransport final : public Transport {
public:
    explicit FixtureTransport(std::vector<FixtureExchange> exchanges, bool strict = false);
    HttpResponse post(const HttpRequest& request) override;
    std::size_t replayed() const;

private:
    std::vector<FixtureExchange> exchanges_;
    bool strict_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
};

class RecordingTransport final : public Transport {
public:
    explicit RecordingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}
    HttpResponse post(const HttpRequest& request) override;
    std::vector<FixtureExchange> exchanges() const;

private:
    std::shared_ptr<Transport> inner_;
    mutable std::mutex mutex_;
    std::vector<FixtureExchange> exchanges_;
};

struct RemoteConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string model_id;
    std::string api_key_env;  // empty: no Authorization header
    std::chrono::milliseconds timeout{60000};
    int max_retries = 5;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_max{30000};
    std::size_t concurrency_cap = 8;
    double requests_per_minute = 0.0;  // 0: unlimited

    void validate() const;
};

void to_json(json& j, const RemoteConfig& config);
void from_json(const json& j, RemoteConfig& config);

// OpenAI-compatible chat-completions client with retries and exponential backoff.
class RemoteClient final : public TextCompleter {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    // Throws config_error if api_key_env is set but missing from the environment.
    RemoteClient(RemoteConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper = {});

    CompletionResult complete(const CompletionRequest& request) override;
    std::string model_id() const override { return config_.model_id; }
    const RemoteConfig& config() const noexcept { return config_; }

    // Delay before retry number `retry` (1-based).
    std::chrono::milliseconds backoff_delay(int retry, const HttpResponse& last) const;

private:
    RemoteConfig config_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;
    std::string api_key_;
    TokenBucket bucket_;
    CallGate gate_;
};

bool is_retryable(const HttpResponse& response);

// Agent reply envelope: {"role", "participate", "depends_on", "content"}.
struct Envelope {
    std::optional<std::string> role;
    bool participate = true;
    std::vector<int> depends_on;
    std::string content;
};

// Lenient extraction: embedded JSON object first, then "key: value" lines.
std::optional<Envelope> parse_envelope(std::string_view text);
std::optional<std::map<int, Directive>> parse_plan(std::string_view text, int n_agents);

// Agent backend rendering the prompt templates and calling a TextCompleter.
class LlmAgentBackend final : public AgentBackend {
public:
    LlmAgentBackend(std::shared_ptr<TextCompleter> completer, PromptSet prompts);

    AgentReply respond(const AgentRequest& request) override;
    std::string describe() const override { return "llm:" + completer_->model_id(); }

private:
    std::shared_ptr<TextCompleter> completer_;
    PromptSet prompts_;
};

}  // namespace agentorg
