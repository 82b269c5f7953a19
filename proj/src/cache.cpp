#include "promptloop/cache.hpp"

#include "promptloop/errors.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>
#include <openssl/evp.h>

namespace promptloop {

using nlohmann::json;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string cache_key(const std::string& backend_kind, const ChatRequest& request) {
    json doc;
    doc["backend"] = backend_kind;
    doc["model"] = request.model_id;
    doc["role"] = to_string(request.role_tag);
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"speaker", to_string(m.speaker)}, {"content", m.content}});
    }
    doc["messages"] = std::move(messages);
    if (request.max_tokens) {
        doc["max_tokens"] = *request.max_tokens;
    } else {
        doc["max_tokens"] = nullptr;
    }
    doc["temperature"] = request.temperature;
    if (request.seed) {
        doc["seed"] = *request.seed;
    } else {
        doc["seed"] = nullptr;
    }
    return sha256_hex(doc.dump());
}

CacheBackend::CacheBackend(std::shared_ptr<ChatBackend> inner, std::string backend_kind,
                           std::filesystem::path cache_dir)
    : inner_(std::move(inner)), backend_kind_(std::move(backend_kind)), dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(dir_);
}

namespace {

std::optional<Completion> read_entry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        json doc;
        in >> doc;
        Completion c;
        c.text = doc.at("text").get<std::string>();
        const std::string finish = doc.at("finish_reason").get<std::string>();
        if (finish == "stop") {
            c.finish_reason = FinishReason::stop;
        } else if (finish == "length") {
            c.finish_reason = FinishReason::length;
        } else if (finish == "error") {
            c.finish_reason = FinishReason::error;
        } else {
            return std::nullopt;
        }
        c.prompt_tokens = doc.at("prompt_tokens").get<std::int64_t>();
        c.completion_tokens = doc.at("completion_tokens").get<std::int64_t>();
        return c;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

Completion CacheBackend::complete(const ChatRequest& request) {
    if (request.temperature > 0.0 && !request.seed) {
        // Caching nondeterministic samples would silently change statistics.
        ++bypasses_;
        return inner_->complete(request);
    }
    const std::string key = cache_key(backend_kind_, request);
    const auto path = dir_ / (key + ".json");
    if (std::filesystem::exists(path)) {
        if (auto hit = read_entry(path)) {
            ++hits_;
            return *hit;
        }
        std::cerr << "[cache] corrupt entry treated as miss: " << path << "\n";
    }
    ++misses_;
    const Completion c = inner_->complete(request);

    json doc;
    doc["text"] = c.text;
    doc["finish_reason"] = to_string(c.finish_reason);
    doc["prompt_tokens"] = c.prompt_tokens;
    doc["completion_tokens"] = c.completion_tokens;

    // Atomic publish: write a temp file, then rename over the final name.
    // Same-key races thus resolve to one stored value.
    std::lock_guard lock(write_mu_);
    const auto tmp = dir_ / (key + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw Error("cache directory not writable: " + dir_.string());
        }
        out << doc.dump();
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
    return c;
}

}  // namespace promptloop
