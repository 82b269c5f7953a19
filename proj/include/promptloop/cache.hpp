#pragma once

#include "promptloop/backend.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

namespace promptloop {

/// SHA-256 hex digest.
std::string sha256_hex(const std::string& data);

/// Content-address of a completion request: digest over backend kind,
/// model id, full message list, max_tokens, temperature, and seed.
std::string cache_key(const std::string& backend_kind, const ChatRequest& request);

/// Content-addressed completion cache, layered over any backend. On a hit the
/// stored completion is returned without touching the inner backend; on a miss
/// the inner backend is called and the result stored (atomic file write).
/// Corrupt entries are treated as misses. Requests with temperature > 0 and no
/// seed bypass the cache entirely.
class CacheBackend : public ChatBackend {
public:
    CacheBackend(std::shared_ptr<ChatBackend> inner, std::string backend_kind,
                 std::filesystem::path cache_dir);

    Completion complete(const ChatRequest& request) override;
    std::int64_t transport_calls() const override { return inner_->transport_calls(); }

    std::int64_t hits() const { return hits_.load(); }
    std::int64_t misses() const { return misses_.load(); }
    std::int64_t bypasses() const { return bypasses_.load(); }

private:
    std::shared_ptr<ChatBackend> inner_;
    std::string backend_kind_;
    std::filesystem::path dir_;
    std::mutex write_mu_;
    std::atomic<std::int64_t> hits_{0};
    std::atomic<std::int64_t> misses_{0};
    std::atomic<std::int64_t> bypasses_{0};
};

}  // namespace promptloop
