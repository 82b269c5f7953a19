#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace promptloop {

enum class RoleTag { task, feedback, optimizer, verifier, judge };

const char* to_string(RoleTag tag);
std::optional<RoleTag> role_from_string(const std::string& s);

enum class Speaker { system, user, assistant };

const char* to_string(Speaker s);

struct ChatMessage {
    Speaker speaker = Speaker::user;
    std::string content;
};

/// Backend-neutral chat-completion request. max_tokens carries the i*k
/// generation budget and must be set on every task-role partial generation.
struct ChatRequest {
    RoleTag role_tag = RoleTag::task;
    std::vector<ChatMessage> messages;
    std::optional<int> max_tokens;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::string model_id;
};

enum class FinishReason { stop, length, error };

const char* to_string(FinishReason r);

struct Completion {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

/// Abstract chat-completion transport. Implementations must be safe to share
/// across concurrent evaluation workers.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual Completion complete(const ChatRequest& request) = 0;
    /// Number of requests this backend has actually served (cache hits on a
    /// wrapping cache do not reach here).
    virtual std::int64_t transport_calls() const = 0;
};

/// Retry behavior for networked backends.
struct RetryPolicy {
    int max_attempts = 3;
    int initial_backoff_ms = 200;
    double backoff_multiplier = 2.0;
    int timeout_seconds = 120;
};

/// Enforces a token budget with a whitespace-token proxy, for backends that
/// ignore max_tokens. Tokens are maximal non-whitespace runs; output joins the
/// first `budget` of them with single spaces.
std::string truncate_to_budget(const std::string& text, int budget);

/// Whitespace-token count under the same proxy.
std::int64_t approx_token_count(const std::string& text);

}  // namespace promptloop
