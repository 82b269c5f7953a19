#include "promptloop/http_backend.hpp"

#include "promptloop/errors.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace promptloop {

using nlohmann::json;

namespace {

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

// Splits "https://host:port/some/prefix" into authority and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("backend base_url needs a scheme: " + base_url);
    }
    std::size_t path = base_url.find('/', scheme + 3);
    if (path == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path), prefix};
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("http backend needs a base_url");
    std::tie(host_, prefix_) = split_base_url(config_.base_url);
}

std::string HttpBackend::wire_body(const ChatRequest& request) {
    json body;
    body["model"] = request.model_id;
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", to_string(m.speaker)}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
    body["temperature"] = request.temperature;
    if (request.seed) body["seed"] = *request.seed;
    return body.dump();
}

Completion HttpBackend::complete(const ChatRequest& request) {
    if (request.messages.empty()) throw ProtocolError("chat request without messages");

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const std::string body = wire_body(request);
    const std::string path = prefix_ + config_.completions_path;

    std::string last_error;
    int delay_ms = config_.retry.initial_backoff_ms;
    const int attempts = std::max(1, config_.retry.max_attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms = static_cast<int>(delay_ms * config_.retry.backoff_multiplier);
        }
        httplib::Client client(host_);
        client.set_connection_timeout(config_.retry.timeout_seconds, 0);
        client.set_read_timeout(config_.retry.timeout_seconds, 0);
        client.set_write_timeout(config_.retry.timeout_seconds, 0);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (retryable_status(res->status)) {
            last_error = "upstream status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ProtocolError("upstream returned status " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 200));
        }
        ++served_;

        json doc;
        try {
            doc = json::parse(res->body);
        } catch (const json::exception& ex) {
            throw ProtocolError(std::string("malformed response body: ") + ex.what());
        }
        try {
            const json& choice = doc.at("choices").at(0);
            Completion c;
            if (choice.contains("message")) {
                c.text = choice.at("message").value("content", "");
            } else {
                c.text = choice.value("text", "");
            }
            const std::string finish = choice.value("finish_reason", "stop");
            c.finish_reason = finish == "length" ? FinishReason::length
                              : finish == "stop" ? FinishReason::stop
                                                 : FinishReason::error;
            if (doc.contains("usage")) {
                c.prompt_tokens = doc.at("usage").value("prompt_tokens", 0);
                c.completion_tokens = doc.at("usage").value("completion_tokens", 0);
            }
            if (c.completion_tokens == 0) c.completion_tokens = approx_token_count(c.text);
            if (config_.enforce_budget && request.max_tokens &&
                approx_token_count(c.text) > *request.max_tokens) {
                c.text = truncate_to_budget(c.text, *request.max_tokens);
                c.finish_reason = FinishReason::length;
            }
            return c;
        } catch (const json::exception& ex) {
            throw ProtocolError(std::string("response missing choices: ") + ex.what());
        }
    }
    throw BackendUnavailableError("backend unavailable after " + std::to_string(attempts) +
                                  " attempts (" + last_error + "): " + host_);
}

}  // namespace promptloop
