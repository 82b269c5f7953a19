#pragma once

#include "promptloop/backend.hpp"
#include "promptloop/datasets.hpp"
#include "promptloop/engine.hpp"
#include "promptloop/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace promptloop {

enum class ScoringMode { deterministic, judge };

struct RoleEndpointConfig {
    std::string backend_kind;  // "http" or "scripted"
    std::string model;
    // http
    std::string base_url;
    std::string completions_path = "/v1/chat/completions";
    std::string api_key_env;
    bool enforce_budget = false;
    int max_attempts = 3;
    int initial_backoff_ms = 200;
    double backoff_multiplier = 2.0;
    int timeout_seconds = 120;
    // scripted
    std::string script;
};

/// One declarative file describes a run completely; environment variables
/// supply secrets only. Unknown keys are rejected.
struct RunConfig {
    TaskKind dataset = TaskKind::gsm8k;
    Split split = Split::test;
    std::vector<Method> methods;
    RunParams params;
    std::map<std::string, RoleEndpointConfig> roles;  // task, feedback, [optimizer, verifier, judge]
    int concurrency = 1;
    bool cache_enabled = true;
    std::string cache_dir = "cache";
    std::string out_dir = "out";
    std::string data_dir = "data";
    std::string template_dir = "templates";
    ScoringMode scoring = ScoringMode::deterministic;
    GenerationMode generation = GenerationMode::fresh;
    FinalAnswerMode final_answer = FinalAnswerMode::regenerate;
    int answer_max_tokens = 512;
    double prompt_cap_factor = 4.0;
    int limit = 0;  // 0 = whole split

    /// The role's effective endpoint config: optimizer, verifier, and judge
    /// fall back to the feedback endpoint when not given.
    const RoleEndpointConfig& endpoint(RoleTag tag) const;

    /// Canonical serialized form (defaults filled in, keys sorted).
    nlohmann::json canonical_json() const;
    /// SHA-256 of the canonical form; names the per-run output directory.
    std::string digest() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace promptloop
