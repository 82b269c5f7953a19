#pragma once

#include "promptloop/backend.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/roles.hpp"
#include "promptloop/types.hpp"

#include <memory>
#include <optional>
#include <utility>

namespace promptloop {

struct RoleEndpoint {
    std::shared_ptr<ChatBackend> backend;
    std::string model_id;
};

/// Backends and templates for the four LLM roles (plus the optional judge).
/// Feedback and verifier may share one endpoint.
struct RoleBindings {
    RoleEndpoint task;
    RoleEndpoint feedback;
    RoleEndpoint optimizer;
    RoleEndpoint verifier;
    RoleEndpoint judge;
    const TemplateSet* templates = nullptr;
};

/// Whether each iteration regenerates from scratch under the i*k budget or
/// continues the previous partial output with k more tokens.
enum class GenerationMode { fresh, continuation };

/// Where the post-refinement answer comes from: a fresh full generation under
/// the optimized prompt, or the last partial output (honored only when the
/// loop terminated on EOS).
enum class FinalAnswerMode { regenerate, last_partial };

struct EngineOptions {
    GenerationMode generation = GenerationMode::fresh;
    FinalAnswerMode final_answer = FinalAnswerMode::regenerate;
    int answer_max_tokens = 512;
    // The optimized prompt may grow to at most this multiple of the initial
    // prompt's length; a longer candidate is rejected and refinement stops.
    double prompt_cap_factor = 4.0;
};

/// A backend failed mid-loop; carries whatever steps completed.
class AbortedRunError : public Error {
public:
    AbortedRunError(const std::string& what, RefinementTrace partial)
        : Error(what), partial_trace(std::move(partial)) {}
    RefinementTrace partial_trace;
};

/// The refinement loop. For i = 1..n: generate a partial output under the
/// current prompt with token budget i*k, get textual feedback on it, optimize
/// the prompt from that feedback; stop after the optimizer step once the
/// partial generation finished naturally. Returns the final prompt and a
/// trace with one step per executed iteration.
std::pair<PromptText, RefinementTrace> refine_prompt(const Query& q, const PromptText& p,
                                                     const RunParams& params,
                                                     const RoleBindings& roles,
                                                     const EngineOptions& opts = {},
                                                     RoleCounts* calls = nullptr,
                                                     RoleCounts* tokens = nullptr);

struct AnswerOnce {
    std::string raw;
    std::optional<NormalizedAnswer> answer;  // nullopt = unparseable
    FinishReason finish = FinishReason::stop;
};

/// One full (generously budgeted) task completion under prompt p, with
/// task-specific answer extraction.
AnswerOnce answer_once(const Query& q, const PromptText& p, const RunParams& params,
                       const RoleBindings& roles, const EngineOptions& opts = {},
                       RoleCounts* calls = nullptr, RoleCounts* tokens = nullptr);

struct SolveOutcome {
    EvalRecord record;
    std::optional<RefinementTrace> trace;
    std::string initial_raw;
    std::string final_raw;  // equals initial_raw when not refined
    std::optional<Verdict> verdict;
};

/// The gated wrapper: answer once under the task's initial prompt, decide
/// whether to refine (always / verifier verdict / gold comparison), and if so
/// run the loop and answer under the optimized prompt. A refinement that
/// errors falls back to the initial answer with the record flagged fail-open.
SolveOutcome gated_solve(const Query& q, const RunParams& params, const RoleBindings& roles,
                         const EngineOptions& opts = {});

/// Zero-shot baseline: one task completion under the initial prompt.
SolveOutcome solve_baseline(const Query& q, const RunParams& params, const RoleBindings& roles,
                            const EngineOptions& opts = {});

Method method_for_mode(GatingMode mode);

}  // namespace promptloop
