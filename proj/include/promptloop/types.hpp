#pragma once

#include "promptloop/answer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace promptloop {

enum class TaskKind { object_counting, word_sorting, gsm8k, svamp, aquarat };

enum class GatingMode { always_refine, verifier_gated, oracle_gated };

enum class Method {
    cot_baseline,
    prorefine_no_verifier,
    prorefine_verifier,
    prorefine_optimal_verifier,
};

const char* to_string(TaskKind task);
const char* to_string(GatingMode mode);
const char* to_string(Method method);
std::optional<TaskKind> task_from_string(const std::string& s);
std::optional<GatingMode> gating_from_string(const std::string& s);
std::optional<Method> method_from_string(const std::string& s);

/// One benchmark item.
struct Query {
    std::string id;    // unique within a split
    TaskKind task = TaskKind::gsm8k;
    std::string text;  // the question put to the task model
    std::optional<NormalizedAnswer> gold;
};

/// The instruction prompt being optimized. Task-generic at initialization.
struct PromptText {
    std::string text;
};

/// Refinement-loop parameters.
struct RunParams {
    int tokens_per_step = 10;  // k
    int max_steps = 25;        // n
    GatingMode mode = GatingMode::verifier_gated;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
};

/// One executed iteration of the refinement loop.
struct TranscriptStep {
    int iteration = 0;      // 1-based
    int token_budget = 0;   // iteration * tokens_per_step
    std::string partial_output;
    std::string feedback;
    PromptText prompt_before;
    PromptText prompt_after;
    bool saw_eos = false;
};

enum class TerminationReason {
    eos,        // task completion finished naturally
    max_steps,  // loop bound reached
    prompt_cap, // optimized prompt exceeded the length cap; refinement stopped early
};

enum class FinalAnswerSource { last_partial, fresh_generation };

const char* to_string(TerminationReason r);
const char* to_string(FinalAnswerSource s);

/// Full record of one refinement run over a single query.
struct RefinementTrace {
    std::string query_id;
    std::vector<TranscriptStep> steps;
    PromptText final_prompt;
    TerminationReason terminated_by = TerminationReason::max_steps;
    FinalAnswerSource final_answer_source = FinalAnswerSource::fresh_generation;
};

/// Verifier judgment over an initial output.
struct Verdict {
    enum class Value { correct, incorrect, unparseable };
    Value value = Value::unparseable;
    std::string raw_judgment;
};

/// Per-role call or token tallies.
struct RoleCounts {
    std::int64_t task = 0;
    std::int64_t feedback = 0;
    std::int64_t optimizer = 0;
    std::int64_t verifier = 0;
    std::int64_t judge = 0;

    std::int64_t total() const { return task + feedback + optimizer + verifier + judge; }
    RoleCounts& operator+=(const RoleCounts& o) {
        task += o.task;
        feedback += o.feedback;
        optimizer += o.optimizer;
        verifier += o.verifier;
        judge += o.judge;
        return *this;
    }
};

/// Per-query outcome for one method.
struct EvalRecord {
    std::string query_id;
    Method method = Method::cot_baseline;
    std::optional<NormalizedAnswer> predicted;  // nullopt = unparseable
    bool correct = false;
    bool refined = false;
    int iterations = 0;   // 0 when not refined
    bool fail_open = false;  // refinement errored; fell back to the initial answer
    RoleCounts calls;
    RoleCounts tokens;
};

}  // namespace promptloop
