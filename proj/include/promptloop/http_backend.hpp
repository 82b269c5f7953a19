#pragma once

#include "promptloop/backend.hpp"

#include <atomic>
#include <string>

namespace promptloop {

struct HttpBackendConfig {
    std::string base_url;                                  // e.g. http://localhost:8000
    std::string completions_path = "/v1/chat/completions";
    std::string api_key_env;                               // env var holding the bearer token
    RetryPolicy retry;
    // Apply the whitespace-token proxy when the server returns more than the
    // requested budget.
    bool enforce_budget = false;
};

/// Chat-completions client over the de-facto standard wire protocol:
/// POST {base_url}{completions_path} with a JSON body carrying model,
/// messages, max_tokens, temperature, and seed; bearer auth from the
/// configured environment variable; the first choice supplies text and
/// finish_reason. Retries transport failures and retryable statuses
/// (408/429/5xx) with exponential backoff.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    Completion complete(const ChatRequest& request) override;
    std::int64_t transport_calls() const override { return served_.load(); }

    /// The JSON request body; exposed for tests.
    static std::string wire_body(const ChatRequest& request);

private:
    HttpBackendConfig config_;
    std::string host_;    // scheme://authority
    std::string prefix_;  // path prefix from base_url, if any
    std::atomic<std::int64_t> served_{0};
};

}  // namespace promptloop
