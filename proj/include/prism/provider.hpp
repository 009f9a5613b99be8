#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace prism::provider {

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    Usage& operator+=(const Usage& other) {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

struct ChatRequest {
    std::string model_id;
    std::string system_prompt;
    std::string user_prompt;
    std::string schema_id;  // expected structured-output schema
    int max_output_tokens = 8192;
    bool deterministic = true;  // request temperature-0 behaviour
};

struct Completion {
    std::string text;
    Usage usage;                  // accumulated across attempts
    std::int64_t latency_ms = 0;  // wall clock across attempts
    int attempts = 1;
};

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds initial_delay{25};
    double backoff_multiplier = 2.0;
};

/// One transport-level attempt. Mock implementations may report a synthetic
/// latency so reruns produce identical telemetry.
struct RawCompletion {
    std::string text;
    Usage usage;
    std::optional<std::int64_t> synthetic_latency_ms;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string id() const = 0;
    /// Throws TransportError / RateLimitError (retryable) or AuthError /
    /// BadRequestError (not retryable).
    virtual RawCompletion complete_once(const ChatRequest& request) = 0;
};

/// Called with each attempt's text; throwing ParseFailure triggers a retry,
/// any other exception propagates.
using CompletionValidator = std::function<void(const std::string& text)>;

/// Runs the retry loop around a provider: transport and rate-limit errors and
/// validator ParseFailures are retried with exponential backoff until
/// max_retries is exhausted (then ProviderExhausted carries the last cause).
/// Usage is accumulated across attempts and latency covers all of them.
Completion complete(ChatProvider& provider, const ChatRequest& request,
                    const RetryPolicy& policy, const CompletionValidator& validator = nullptr);

/// Deterministic lexical-overlap score used by the mock provider: the overlap
/// ratio between the query's and candidate's token sets maps linearly onto
/// [1,10], then a seed-keyed hash adds a perturbation in {-1,0,+1}, clamped
/// back to [1,10].
int mock_score(const std::string& query, const std::string& candidate_text, std::uint64_t seed);

/// Fully offline provider. Responses are a pure function of (request, seed):
/// the user prompt's `Question:` line and `[index] text` candidate lines are
/// scored with mock_score (the agent's system prompt contributes its domain
/// vocabulary and perturbation key), then serialized into the schema named by
/// the request.
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::uint64_t seed = 0);

    std::string id() const override { return "mock"; }
    std::uint64_t seed() const { return seed_; }
    RawCompletion complete_once(const ChatRequest& request) override;

    /// Fault injection for retry tests: the next `count` calls fail.
    void inject_transport_failures(int count) { transport_failures_ = count; }
    /// The next `count` calls return prose with no JSON payload.
    void inject_garbage_responses(int count) { garbage_responses_ = count; }

private:
    std::uint64_t seed_;
    std::atomic<int> transport_failures_{0};
    std::atomic<int> garbage_responses_{0};
};

/// Chat-completions HTTP client in the de-facto shape: POST
/// {base}/chat/completions with a messages array, usage read from the
/// response. Configuration comes from PRISM_API_BASE / PRISM_API_KEY unless
/// given explicitly.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider();  // reads environment
    HttpChatProvider(std::string base_url, std::string api_key);

    std::string id() const override { return "http"; }
    RawCompletion complete_once(const ChatRequest& request) override;

private:
    std::string base_url_;
    std::string api_key_;
};

/// Total HTTP requests issued by this process; lets tests assert that the
/// mock path never touches the network.
std::int64_t http_requests_issued();

/// "mock" selects MockChatProvider (seed from PRISM_MOCK_SEED when not given);
/// "http" selects HttpChatProvider.
std::unique_ptr<ChatProvider> make_chat_provider(const std::string& provider_id,
                                                 std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace prism::provider
