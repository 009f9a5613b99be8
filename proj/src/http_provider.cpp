#include <atomic>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "prism/errors.hpp"
#include "prism/provider.hpp"

namespace prism::provider {

using nlohmann::json;

namespace {

std::atomic<std::int64_t> g_http_requests{0};

std::string env_or(const char* name, const char* fallback) {
    const char* value = std::getenv(name);
    return value ? value : fallback;
}

}  // namespace

std::int64_t http_requests_issued() { return g_http_requests.load(); }

HttpChatProvider::HttpChatProvider()
    : HttpChatProvider(env_or("PRISM_API_BASE", ""), env_or("PRISM_API_KEY", "")) {}

HttpChatProvider::HttpChatProvider(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {
    if (base_url_.empty()) {
        throw ConfigError("PRISM_API_BASE is not set");
    }
}

RawCompletion HttpChatProvider::complete_once(const ChatRequest& request) {
    json body = {
        {"model", request.model_id},
        {"messages",
         json::array({
             {{"role", "system"}, {"content", request.system_prompt}},
             {{"role", "user"}, {"content", request.user_prompt}},
         })},
        {"max_tokens", request.max_output_tokens},
    };
    if (request.deterministic) {
        body["temperature"] = 0.0;
    }

    httplib::Client client(base_url_);
    client.set_connection_timeout(30);
    client.set_read_timeout(600);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    ++g_http_requests;
    auto response = client.Post("/chat/completions", headers, body.dump(), "application/json");
    if (!response) {
        throw TransportError("chat completion request failed: " +
                             httplib::to_string(response.error()));
    }
    if (response->status == 401 || response->status == 403) {
        throw AuthError("provider rejected credentials (status " +
                        std::to_string(response->status) + ")");
    }
    if (response->status == 429) {
        throw RateLimitError("provider rate limit (status 429)");
    }
    if (response->status == 400) {
        throw BadRequestError("provider rejected request: " + response->body);
    }
    if (response->status >= 500) {
        throw TransportError("provider error (status " + std::to_string(response->status) + ")");
    }
    if (response->status != 200) {
        throw TransportError("unexpected status " + std::to_string(response->status));
    }

    json parsed = json::parse(response->body, nullptr, false);
    if (parsed.is_discarded()) {
        throw TransportError("provider returned unparseable body");
    }

    RawCompletion raw;
    try {
        raw.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw TransportError("provider response missing choices[0].message.content");
    }
    if (auto usage = parsed.find("usage"); usage != parsed.end() && usage->is_object()) {
        raw.usage.prompt_tokens = usage->value("prompt_tokens", 0);
        raw.usage.completion_tokens = usage->value("completion_tokens", 0);
    }
    return raw;
}

}  // namespace prism::provider
