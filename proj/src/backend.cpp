#include "promptloop/backend.hpp"

#include "promptloop/types.hpp"

#include <cctype>
#include <sstream>

namespace promptloop {

const char* to_string(RoleTag tag) {
    switch (tag) {
        case RoleTag::task: return "task";
        case RoleTag::feedback: return "feedback";
        case RoleTag::optimizer: return "optimizer";
        case RoleTag::verifier: return "verifier";
        case RoleTag::judge: return "judge";
    }
    return "?";
}

std::optional<RoleTag> role_from_string(const std::string& s) {
    if (s == "task") return RoleTag::task;
    if (s == "feedback") return RoleTag::feedback;
    if (s == "optimizer") return RoleTag::optimizer;
    if (s == "verifier") return RoleTag::verifier;
    if (s == "judge") return RoleTag::judge;
    return std::nullopt;
}

const char* to_string(Speaker s) {
    switch (s) {
        case Speaker::system: return "system";
        case Speaker::user: return "user";
        case Speaker::assistant: return "assistant";
    }
    return "?";
}

const char* to_string(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "?";
}

const char* to_string(TaskKind task) {
    switch (task) {
        case TaskKind::object_counting: return "object_counting";
        case TaskKind::word_sorting: return "word_sorting";
        case TaskKind::gsm8k: return "gsm8k";
        case TaskKind::svamp: return "svamp";
        case TaskKind::aquarat: return "aquarat";
    }
    return "?";
}

std::optional<TaskKind> task_from_string(const std::string& s) {
    if (s == "object_counting") return TaskKind::object_counting;
    if (s == "word_sorting") return TaskKind::word_sorting;
    if (s == "gsm8k") return TaskKind::gsm8k;
    if (s == "svamp") return TaskKind::svamp;
    if (s == "aquarat") return TaskKind::aquarat;
    return std::nullopt;
}

const char* to_string(GatingMode mode) {
    switch (mode) {
        case GatingMode::always_refine: return "always_refine";
        case GatingMode::verifier_gated: return "verifier_gated";
        case GatingMode::oracle_gated: return "oracle_gated";
    }
    return "?";
}

std::optional<GatingMode> gating_from_string(const std::string& s) {
    if (s == "always_refine") return GatingMode::always_refine;
    if (s == "verifier_gated") return GatingMode::verifier_gated;
    if (s == "oracle_gated") return GatingMode::oracle_gated;
    return std::nullopt;
}

const char* to_string(Method method) {
    switch (method) {
        case Method::cot_baseline: return "cot_baseline";
        case Method::prorefine_no_verifier: return "prorefine_no_verifier";
        case Method::prorefine_verifier: return "prorefine_verifier";
        case Method::prorefine_optimal_verifier: return "prorefine_optimal_verifier";
    }
    return "?";
}

std::optional<Method> method_from_string(const std::string& s) {
    if (s == "cot_baseline") return Method::cot_baseline;
    if (s == "prorefine_no_verifier") return Method::prorefine_no_verifier;
    if (s == "prorefine_verifier") return Method::prorefine_verifier;
    if (s == "prorefine_optimal_verifier") return Method::prorefine_optimal_verifier;
    return std::nullopt;
}

const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::eos: return "eos";
        case TerminationReason::max_steps: return "max_steps";
        case TerminationReason::prompt_cap: return "prompt_cap";
    }
    return "?";
}

const char* to_string(FinalAnswerSource s) {
    switch (s) {
        case FinalAnswerSource::last_partial: return "last_partial";
        case FinalAnswerSource::fresh_generation: return "fresh_generation";
    }
    return "?";
}

std::string truncate_to_budget(const std::string& text, int budget) {
    std::istringstream in(text);
    std::string token;
    std::string out;
    int kept = 0;
    while (kept < budget && (in >> token)) {
        if (kept) out += ' ';
        out += token;
        ++kept;
    }
    return out;
}

std::int64_t approx_token_count(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    std::int64_t n = 0;
    while (in >> token) ++n;
    return n;
}

}  // namespace promptloop
