#include "promptloop/scripted_backend.hpp"

#include "promptloop/errors.hpp"

#include <fstream>

namespace promptloop {

ScriptedBackend::Entry& ScriptedBackend::entry_for(RoleTag role, const std::string& needle,
                                                   bool has_matcher) {
    for (auto& e : entries_) {
        if (e.role == role && e.has_matcher == has_matcher && e.needle == needle) return e;
    }
    Entry e;
    e.role = role;
    e.needle = needle;
    e.has_matcher = has_matcher;
    entries_.push_back(std::move(e));
    return entries_.back();
}

void ScriptedBackend::push(RoleTag role, ScriptedResponse response) {
    std::lock_guard lock(mu_);
    entry_for(role, "", false).responses.push_back(std::move(response));
}

void ScriptedBackend::push_matched(RoleTag role, const std::string& needle,
                                   ScriptedResponse response) {
    std::lock_guard lock(mu_);
    entry_for(role, needle, true).responses.push_back(std::move(response));
}

void ScriptedBackend::set_repeat_last(RoleTag role) {
    std::lock_guard lock(mu_);
    entry_for(role, "", false).repeat_last = true;
}

void ScriptedBackend::set_repeat_last_matched(RoleTag role, const std::string& needle) {
    std::lock_guard lock(mu_);
    entry_for(role, needle, true).repeat_last = true;
}

ScriptedBackend::Entry* ScriptedBackend::pick(const ChatRequest& request,
                                              const std::string& content, bool want_matcher) {
    for (auto& e : entries_) {
        if (e.role != request.role_tag || e.has_matcher != want_matcher || e.exhausted()) continue;
        if (e.has_matcher && content.find(e.needle) == std::string::npos) continue;
        return &e;
    }
    return nullptr;
}

Completion ScriptedBackend::complete(const ChatRequest& request) {
    std::lock_guard lock(mu_);
    call_log_.push_back(request);

    std::string content;
    for (const auto& m : request.messages) {
        content += m.content;
        content += '\n';
    }

    Entry* e = pick(request, content, /*want_matcher=*/true);
    if (!e) e = pick(request, content, /*want_matcher=*/false);
    if (!e) {
        throw ScriptError(std::string("no scripted response for role '") +
                          to_string(request.role_tag) + "' (script missing or exhausted)");
    }

    const ScriptedResponse& r =
        (e->next < e->responses.size()) ? e->responses[e->next++] : e->responses.back();

    Completion c;
    c.text = r.text;
    c.finish_reason = r.finish_reason;
    c.completion_tokens = approx_token_count(r.text);
    c.prompt_tokens = approx_token_count(content);
    return c;
}

std::int64_t ScriptedBackend::transport_calls() const {
    std::lock_guard lock(mu_);
    return static_cast<std::int64_t>(call_log_.size());
}

std::vector<ChatRequest> ScriptedBackend::call_log() const {
    std::lock_guard lock(mu_);
    return call_log_;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& doc) {
    auto backend = std::make_shared<ScriptedBackend>();
    if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_array()) {
        throw ScriptError("script file must be an object with an \"entries\" array");
    }
    for (const auto& item : doc.at("entries")) {
        auto role = role_from_string(item.value("role", ""));
        if (!role) throw ScriptError("script entry with unknown role: " + item.dump());
        const bool has_matcher = item.contains("match");
        const std::string needle = item.value("match", "");
        if (!item.contains("responses") || !item.at("responses").is_array() ||
            item.at("responses").empty()) {
            throw ScriptError("script entry needs a non-empty \"responses\" array");
        }
        for (const auto& rj : item.at("responses")) {
            ScriptedResponse r;
            r.text = rj.value("text", "");
            const std::string finish = rj.value("finish", "stop");
            if (finish == "stop") {
                r.finish_reason = FinishReason::stop;
            } else if (finish == "length") {
                r.finish_reason = FinishReason::length;
            } else {
                throw ScriptError("script response finish must be \"stop\" or \"length\"");
            }
            if (has_matcher) {
                backend->push_matched(*role, needle, std::move(r));
            } else {
                backend->push(*role, std::move(r));
            }
        }
        if (item.value("repeat_last", false)) {
            if (has_matcher) {
                backend->set_repeat_last_matched(*role, needle);
            } else {
                backend->set_repeat_last(*role);
            }
        }
    }
    return backend;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError("cannot open script file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw ScriptError("malformed script file " + path.string() + ": " + ex.what());
    }
    return from_json(doc);
}

}  // namespace promptloop
