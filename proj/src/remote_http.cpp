#include "httplib.h"

#include <regex>

#include "agentorg/remote.hpp"

namespace agentorg {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, re)) return {url, "/"};
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

}  // namespace

HttpResponse HttplibTransport::post(const HttpRequest& request) {
    const auto url = split_url(request.url);
    HttpResponse out;
    try {
        httplib::Client client(url.origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        httplib::Headers headers;
        std::string content_type = "application/json";
        for (const auto& [k, v] : request.headers) {
            if (k == "Content-Type") {
                content_type = v;
            } else {
                headers.emplace(k, v);
            }
        }
        auto res = client.Post(url.path, headers, request.body, content_type);
        if (!res) {
            out.status = 0;
            out.error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        if (res->has_header("Retry-After")) {
            try {
                out.retry_after_seconds = std::stod(res->get_header_value("Retry-After"));
            } catch (const std::exception&) {
                // HTTP-date form: ignore, fall back to exponential backoff.
            }
        }
    } catch (const std::exception& e) {
        out.status = 0;
        out.error = e.what();
    }
    return out;
}

}  // namespace agentorg
