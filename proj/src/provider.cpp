#include "prism/provider.hpp"

#include <cstdlib>
#include <thread>

#include "prism/errors.hpp"

namespace prism::provider {

Completion complete(ChatProvider& provider, const ChatRequest& request,
                    const RetryPolicy& policy, const CompletionValidator& validator) {
    if (request.system_prompt.empty() && request.user_prompt.empty()) {
        throw ArgumentError("chat request has no prompt content");
    }
    if (request.max_output_tokens <= 0) {
        throw ArgumentError("max_output_tokens must be positive");
    }

    const auto start = std::chrono::steady_clock::now();
    auto delay = policy.initial_delay;
    Usage usage;
    std::int64_t synthetic_total = 0;
    bool all_synthetic = true;
    int attempts = 0;

    for (;;) {
        ++attempts;
        std::string failure;
        try {
            RawCompletion raw = provider.complete_once(request);
            usage += raw.usage;
            if (raw.synthetic_latency_ms) {
                synthetic_total += *raw.synthetic_latency_ms;
            } else {
                all_synthetic = false;
            }
            if (validator) {
                validator(raw.text);
            }
            Completion completion;
            completion.text = std::move(raw.text);
            completion.usage = usage;
            completion.attempts = attempts;
            completion.latency_ms =
                all_synthetic
                    ? synthetic_total
                    : std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
            return completion;
        } catch (const TransportError& e) {
            failure = e.what();
        } catch (const RateLimitError& e) {
            failure = e.what();
        } catch (const ParseFailure& e) {
            failure = e.what();
        }
        if (attempts > policy.max_retries) {
            throw ProviderExhausted("retries exhausted after " + std::to_string(attempts) +
                                    " attempts; last cause: " + failure);
        }
        if (delay.count() > 0) {
            std::this_thread::sleep_for(delay);
        }
        delay = std::chrono::milliseconds(
            static_cast<std::int64_t>(static_cast<double>(delay.count()) *
                                      policy.backoff_multiplier));
    }
}

std::unique_ptr<ChatProvider> make_chat_provider(const std::string& provider_id,
                                                 std::optional<std::uint64_t> seed) {
    if (provider_id == "mock") {
        std::uint64_t effective = seed.value_or(0);
        if (!seed) {
            if (const char* env = std::getenv("PRISM_MOCK_SEED")) {
                effective = std::strtoull(env, nullptr, 10);
            }
        }
        return std::make_unique<MockChatProvider>(effective);
    }
    if (provider_id == "http") {
        return std::make_unique<HttpChatProvider>();
    }
    throw ConfigError("unknown provider id '" + provider_id + "'");
}

}  // namespace prism::provider
