#include "promptloop/config.hpp"

#include "promptloop/cache.hpp"
#include "promptloop/errors.hpp"

#include <fstream>
#include <set>

namespace promptloop {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("unknown config key '" + item.key() + "' in " + where);
        }
    }
}

RoleEndpointConfig parse_endpoint(const json& doc, const std::string& where) {
    reject_unknown_keys(doc,
                        {"backend", "model", "base_url", "completions_path", "api_key_env",
                         "enforce_budget", "max_attempts", "initial_backoff_ms",
                         "backoff_multiplier", "timeout_seconds", "script"},
                        where);
    RoleEndpointConfig ep;
    ep.backend_kind = doc.value("backend", "");
    if (ep.backend_kind != "http" && ep.backend_kind != "scripted") {
        throw ConfigError(where + ".backend must be \"http\" or \"scripted\"");
    }
    ep.model = doc.value("model", "");
    if (ep.model.empty()) throw ConfigError(where + ".model is required");
    ep.base_url = doc.value("base_url", "");
    ep.completions_path = doc.value("completions_path", ep.completions_path);
    ep.api_key_env = doc.value("api_key_env", "");
    ep.enforce_budget = doc.value("enforce_budget", false);
    ep.max_attempts = doc.value("max_attempts", 3);
    ep.initial_backoff_ms = doc.value("initial_backoff_ms", 200);
    ep.backoff_multiplier = doc.value("backoff_multiplier", 2.0);
    ep.timeout_seconds = doc.value("timeout_seconds", 120);
    ep.script = doc.value("script", "");
    if (ep.backend_kind == "http" && ep.base_url.empty()) {
        throw ConfigError(where + ".base_url is required for an http backend");
    }
    if (ep.backend_kind == "scripted" && ep.script.empty()) {
        throw ConfigError(where + ".script is required for a scripted backend");
    }
    if (ep.max_attempts < 1) throw ConfigError(where + ".max_attempts must be >= 1");
    return ep;
}

json endpoint_json(const RoleEndpointConfig& ep) {
    json out;
    out["backend"] = ep.backend_kind;
    out["model"] = ep.model;
    out["base_url"] = ep.base_url;
    out["completions_path"] = ep.completions_path;
    out["api_key_env"] = ep.api_key_env;
    out["enforce_budget"] = ep.enforce_budget;
    out["max_attempts"] = ep.max_attempts;
    out["initial_backoff_ms"] = ep.initial_backoff_ms;
    out["backoff_multiplier"] = ep.backoff_multiplier;
    out["timeout_seconds"] = ep.timeout_seconds;
    out["script"] = ep.script;
    return out;
}

}  // namespace

const RoleEndpointConfig& RunConfig::endpoint(RoleTag tag) const {
    const std::string name = to_string(tag);
    auto it = roles.find(name);
    if (it != roles.end()) return it->second;
    // Optimizer, verifier, and judge share the feedback endpoint by default.
    if (tag != RoleTag::task && tag != RoleTag::feedback) {
        it = roles.find("feedback");
        if (it != roles.end()) return it->second;
    }
    throw ConfigError("no endpoint configured for role " + name);
}

RunConfig parse_run_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
    reject_unknown_keys(doc,
                        {"dataset", "split", "methods", "params", "roles", "concurrency", "cache",
                         "cache_dir", "out_dir", "data_dir", "template_dir", "scoring",
                         "generation", "final_answer", "answer_max_tokens", "prompt_cap_factor",
                         "limit"},
                        "config");
    RunConfig cfg;

    auto dataset = task_from_string(doc.value("dataset", ""));
    if (!dataset) throw ConfigError("config.dataset must name a supported benchmark");
    cfg.dataset = *dataset;

    auto split = split_from_string(doc.value("split", "test"));
    if (!split) throw ConfigError("config.split must be train, validation, or test");
    cfg.split = *split;

    if (doc.contains("params")) {
        const json& p = doc.at("params");
        reject_unknown_keys(p, {"tokens_per_step", "max_steps", "mode", "temperature", "seed"},
                            "config.params");
        cfg.params.tokens_per_step = p.value("tokens_per_step", 10);
        cfg.params.max_steps = p.value("max_steps", 25);
        if (p.contains("mode")) {
            auto mode = gating_from_string(p.at("mode").get<std::string>());
            if (!mode) throw ConfigError("config.params.mode is not a gating mode");
            cfg.params.mode = *mode;
        }
        cfg.params.temperature = p.value("temperature", 0.0);
        if (p.contains("seed")) cfg.params.seed = p.at("seed").get<std::int64_t>();
    }
    if (cfg.params.tokens_per_step < 1) throw ConfigError("tokens_per_step must be >= 1");
    if (cfg.params.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (cfg.params.temperature < 0) throw ConfigError("temperature must be >= 0");

    if (doc.contains("methods")) {
        for (const auto& m : doc.at("methods")) {
            auto method = method_from_string(m.get<std::string>());
            if (!method) throw ConfigError("unknown method in config.methods: " + m.dump());
            cfg.methods.push_back(*method);
        }
        if (cfg.methods.empty()) throw ConfigError("config.methods must not be empty");
    } else {
        cfg.methods = {Method::cot_baseline, method_for_mode(cfg.params.mode)};
    }

    if (!doc.contains("roles") || !doc.at("roles").is_object()) {
        throw ConfigError("config.roles is required");
    }
    reject_unknown_keys(doc.at("roles"), {"task", "feedback", "optimizer", "verifier", "judge"},
                        "config.roles");
    for (const auto& item : doc.at("roles").items()) {
        cfg.roles[item.key()] = parse_endpoint(item.value(), "config.roles." + item.key());
    }
    if (!cfg.roles.count("task")) throw ConfigError("config.roles.task is required");
    if (!cfg.roles.count("feedback")) throw ConfigError("config.roles.feedback is required");

    cfg.concurrency = doc.value("concurrency", 1);
    if (cfg.concurrency < 1) throw ConfigError("concurrency must be >= 1");
    cfg.cache_enabled = doc.value("cache", true);
    cfg.cache_dir = doc.value("cache_dir", cfg.cache_dir);
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    cfg.data_dir = doc.value("data_dir", cfg.data_dir);
    cfg.template_dir = doc.value("template_dir", cfg.template_dir);

    const std::string scoring = doc.value("scoring", "deterministic");
    if (scoring == "deterministic") {
        cfg.scoring = ScoringMode::deterministic;
    } else if (scoring == "judge") {
        cfg.scoring = ScoringMode::judge;
    } else {
        throw ConfigError("config.scoring must be \"deterministic\" or \"judge\"");
    }

    const std::string generation = doc.value("generation", "fresh");
    if (generation == "fresh") {
        cfg.generation = GenerationMode::fresh;
    } else if (generation == "continuation") {
        cfg.generation = GenerationMode::continuation;
    } else {
        throw ConfigError("config.generation must be \"fresh\" or \"continuation\"");
    }

    const std::string final_answer = doc.value("final_answer", "regenerate");
    if (final_answer == "regenerate") {
        cfg.final_answer = FinalAnswerMode::regenerate;
    } else if (final_answer == "last_partial") {
        cfg.final_answer = FinalAnswerMode::last_partial;
    } else {
        throw ConfigError("config.final_answer must be \"regenerate\" or \"last_partial\"");
    }

    cfg.answer_max_tokens = doc.value("answer_max_tokens", 512);
    if (cfg.answer_max_tokens < 1) throw ConfigError("answer_max_tokens must be >= 1");
    cfg.prompt_cap_factor = doc.value("prompt_cap_factor", 4.0);
    if (cfg.prompt_cap_factor < 1.0) throw ConfigError("prompt_cap_factor must be >= 1");
    cfg.limit = doc.value("limit", 0);
    if (cfg.limit < 0) throw ConfigError("limit must be >= 0");

    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& ex) {
        throw ConfigError("malformed config file " + path.string() + ": " + ex.what());
    }
    return parse_run_config(doc);
}

json RunConfig::canonical_json() const {
    json doc;
    doc["dataset"] = to_string(dataset);
    doc["split"] = to_string(split);
    json methods_json = json::array();
    for (Method m : methods) methods_json.push_back(to_string(m));
    doc["methods"] = std::move(methods_json);
    doc["params"] = {{"tokens_per_step", params.tokens_per_step},
                     {"max_steps", params.max_steps},
                     {"mode", to_string(params.mode)},
                     {"temperature", params.temperature},
                     {"seed", params.seed ? json(*params.seed) : json(nullptr)}};
    json roles_json;
    for (const auto& [name, ep] : roles) roles_json[name] = endpoint_json(ep);
    doc["roles"] = std::move(roles_json);
    doc["concurrency"] = concurrency;
    doc["cache"] = cache_enabled;
    doc["cache_dir"] = cache_dir;
    doc["out_dir"] = out_dir;
    doc["data_dir"] = data_dir;
    doc["template_dir"] = template_dir;
    doc["scoring"] = scoring == ScoringMode::judge ? "judge" : "deterministic";
    doc["generation"] = generation == GenerationMode::continuation ? "continuation" : "fresh";
    doc["final_answer"] =
        final_answer == FinalAnswerMode::last_partial ? "last_partial" : "regenerate";
    doc["answer_max_tokens"] = answer_max_tokens;
    doc["prompt_cap_factor"] = prompt_cap_factor;
    doc["limit"] = limit;
    return doc;
}

std::string RunConfig::digest() const {
    return sha256_hex(canonical_json().dump());
}

}  // namespace promptloop
