#pragma once

#include "promptloop/backend.hpp"

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace promptloop {

struct ScriptedResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
};

/// Deterministic stand-in LLM. Responses are scripted per role, consumed in
/// order; entries with a substring matcher take precedence when the matcher
/// occurs in the request's message content. An entry marked repeat_last keeps
/// serving its final response once the list is consumed. Asking for a response
/// that was never scripted (or is exhausted) throws ScriptError.
class ScriptedBackend : public ChatBackend {
public:
    ScriptedBackend() = default;

    void push(RoleTag role, ScriptedResponse response);
    void push_matched(RoleTag role, const std::string& needle, ScriptedResponse response);
    void set_repeat_last(RoleTag role);
    void set_repeat_last_matched(RoleTag role, const std::string& needle);

    Completion complete(const ChatRequest& request) override;
    std::int64_t transport_calls() const override;

    std::vector<ChatRequest> call_log() const;

    /// Script file schema: {"entries": [{"role": "task", "match": "optional
    /// substring", "repeat_last": false, "responses": [{"text": "...",
    /// "finish": "stop"|"length"}]}]}
    static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& doc);
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

private:
    struct Entry {
        RoleTag role;
        std::string needle;  // empty = no matcher
        bool has_matcher = false;
        bool repeat_last = false;
        std::vector<ScriptedResponse> responses;
        std::size_t next = 0;

        bool exhausted() const { return next >= responses.size() && !repeat_last; }
    };

    Entry& entry_for(RoleTag role, const std::string& needle, bool has_matcher);
    Entry* pick(const ChatRequest& request, const std::string& content, bool want_matcher);

    mutable std::mutex mu_;
    std::vector<Entry> entries_;
    std::vector<ChatRequest> call_log_;
};

}  // namespace promptloop
