#include "promptloop/engine.hpp"

#include "promptloop/datasets.hpp"

#include <algorithm>
#include <cctype>

namespace promptloop {

namespace {

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

ChatRequest base_request(RoleTag tag, const RoleEndpoint& endpoint, const RunParams& params) {
    ChatRequest req;
    req.role_tag = tag;
    req.model_id = endpoint.model_id;
    req.temperature = params.temperature;
    req.seed = params.seed;
    return req;
}

Completion call_role(RoleTag tag, const RoleEndpoint& endpoint, ChatRequest req,
                     RoleCounts* calls, RoleCounts* tokens) {
    const Completion c = endpoint.backend->complete(req);
    auto bump = [&](RoleCounts* counts, std::int64_t amount) {
        if (!counts) return;
        switch (tag) {
            case RoleTag::task: counts->task += amount; break;
            case RoleTag::feedback: counts->feedback += amount; break;
            case RoleTag::optimizer: counts->optimizer += amount; break;
            case RoleTag::verifier: counts->verifier += amount; break;
            case RoleTag::judge: counts->judge += amount; break;
        }
    };
    bump(calls, 1);
    bump(tokens, c.prompt_tokens + c.completion_tokens);
    return c;
}

Completion rendered_call(RoleTag tag, const RoleEndpoint& endpoint, const RoleBindings& roles,
                         const RunParams& params,
                         const std::map<std::string, std::string>& bindings, RoleCounts* calls,
                         RoleCounts* tokens) {
    const RoleTemplate& tmpl = roles.templates->role(tag);
    ChatRequest req = base_request(tag, endpoint, params);
    if (!tmpl.system_text.empty()) req.messages.push_back({Speaker::system, tmpl.system_text});
    req.messages.push_back({Speaker::user, render(tmpl, bindings)});
    return call_role(tag, endpoint, std::move(req), calls, tokens);
}

}  // namespace

Method method_for_mode(GatingMode mode) {
    switch (mode) {
        case GatingMode::always_refine: return Method::prorefine_no_verifier;
        case GatingMode::verifier_gated: return Method::prorefine_verifier;
        case GatingMode::oracle_gated: return Method::prorefine_optimal_verifier;
    }
    return Method::prorefine_verifier;
}

std::pair<PromptText, RefinementTrace> refine_prompt(const Query& q, const PromptText& p,
                                                     const RunParams& params,
                                                     const RoleBindings& roles,
                                                     const EngineOptions& opts, RoleCounts* calls,
                                                     RoleCounts* tokens) {
    if (params.tokens_per_step < 1 || params.max_steps < 1) {
        throw Error("refine_prompt needs tokens_per_step >= 1 and max_steps >= 1");
    }
    if (!roles.templates) throw Error("refine_prompt needs templates bound");

    PromptText current = p;
    const std::size_t prompt_cap = static_cast<std::size_t>(
        std::max(1.0, opts.prompt_cap_factor) * static_cast<double>(p.text.size()));

    RefinementTrace trace;
    trace.query_id = q.id;
    trace.final_prompt = current;

    std::string accumulated;  // continuation mode only

    for (int i = 1; i <= params.max_steps; ++i) {
        TranscriptStep step;
        step.iteration = i;
        step.token_budget = i * params.tokens_per_step;
        step.prompt_before = current;

        try {
            // Partial generation under the current prompt, budget i*k
            // (continuation mode asks for k more on top of the prior text).
            ChatRequest task_req = base_request(RoleTag::task, roles.task, params);
            task_req.messages.push_back({Speaker::system, current.text});
            task_req.messages.push_back({Speaker::user, q.text});
            if (opts.generation == GenerationMode::continuation) {
                if (!accumulated.empty()) {
                    task_req.messages.push_back({Speaker::assistant, accumulated});
                }
                task_req.max_tokens = params.tokens_per_step;
            } else {
                task_req.max_tokens = step.token_budget;
            }
            const Completion partial =
                call_role(RoleTag::task, roles.task, std::move(task_req), calls, tokens);
            if (opts.generation == GenerationMode::continuation) {
                accumulated += partial.text;
                step.partial_output = accumulated;
            } else {
                step.partial_output = partial.text;
            }
            step.saw_eos = partial.finish_reason == FinishReason::stop;

            // Textual feedback on the partial output.
            const Completion feedback = rendered_call(
                RoleTag::feedback, roles.feedback, roles, params,
                {{"query", q.text}, {"output", step.partial_output}}, calls, tokens);
            step.feedback = blank(feedback.text) ? "(no feedback produced)" : feedback.text;

            // Prompt optimization from the feedback.
            const Completion optimized = rendered_call(
                RoleTag::optimizer, roles.optimizer, roles, params,
                {{"prompt", current.text}, {"feedback", step.feedback}}, calls, tokens);
            const std::string candidate = extract_optimized_prompt(optimized.text);

            bool cap_hit = false;
            if (blank(candidate)) {
                // Degraded step: keep the previous prompt rather than abort.
                step.prompt_after = current;
            } else if (candidate.size() > prompt_cap) {
                step.prompt_after = current;
                cap_hit = true;
            } else {
                current.text = candidate;
                step.prompt_after = current;
            }

            trace.steps.push_back(std::move(step));
            trace.final_prompt = current;

            if (trace.steps.back().saw_eos) {
                trace.terminated_by = TerminationReason::eos;
                break;
            }
            if (cap_hit) {
                trace.terminated_by = TerminationReason::prompt_cap;
                break;
            }
            trace.terminated_by = TerminationReason::max_steps;
        } catch (const ScriptError&) {
            throw;  // test-harness bug, not a runtime condition
        } catch (const Error& ex) {
            throw AbortedRunError(std::string("refinement aborted at iteration ") +
                                      std::to_string(i) + ": " + ex.what(),
                                  trace);
        }
    }
    return {current, trace};
}

AnswerOnce answer_once(const Query& q, const PromptText& p, const RunParams& params,
                       const RoleBindings& roles, const EngineOptions& opts, RoleCounts* calls,
                       RoleCounts* tokens) {
    ChatRequest req = base_request(RoleTag::task, roles.task, params);
    req.messages.push_back({Speaker::system, p.text});
    req.messages.push_back({Speaker::user, q.text});
    req.max_tokens = opts.answer_max_tokens;
    const Completion c = call_role(RoleTag::task, roles.task, std::move(req), calls, tokens);
    AnswerOnce out;
    out.raw = c.text;
    out.finish = c.finish_reason;
    out.answer = extract_answer(q.task, c.text);
    return out;
}

SolveOutcome solve_baseline(const Query& q, const RunParams& params, const RoleBindings& roles,
                            const EngineOptions& opts) {
    if (!roles.templates) throw Error("solve_baseline needs templates bound");
    SolveOutcome out;
    out.record.query_id = q.id;
    out.record.method = Method::cot_baseline;
    const PromptText p0 = roles.templates->initial_prompt(q.task);
    const AnswerOnce initial =
        answer_once(q, p0, params, roles, opts, &out.record.calls, &out.record.tokens);
    out.initial_raw = initial.raw;
    out.final_raw = initial.raw;
    out.record.predicted = initial.answer;
    out.record.correct =
        q.gold && initial.answer && answers_equal(*initial.answer, *q.gold);
    return out;
}

SolveOutcome gated_solve(const Query& q, const RunParams& params, const RoleBindings& roles,
                         const EngineOptions& opts) {
    if (!roles.templates) throw Error("gated_solve needs templates bound");
    if (params.mode == GatingMode::oracle_gated && !q.gold) {
        throw Error("oracle_gated needs a gold answer for query " + q.id);
    }

    SolveOutcome out;
    out.record.query_id = q.id;
    out.record.method = method_for_mode(params.mode);

    const PromptText p0 = roles.templates->initial_prompt(q.task);
    const AnswerOnce initial =
        answer_once(q, p0, params, roles, opts, &out.record.calls, &out.record.tokens);
    out.initial_raw = initial.raw;

    bool refine = false;
    switch (params.mode) {
        case GatingMode::always_refine:
            refine = true;
            break;
        case GatingMode::verifier_gated: {
            const Completion judged = rendered_call(
                RoleTag::verifier, roles.verifier, roles, params,
                {{"query", q.text}, {"output", initial.raw}}, &out.record.calls,
                &out.record.tokens);
            out.verdict = parse_verdict(judged.text);
            refine = out.verdict->value != Verdict::Value::correct;
            break;
        }
        case GatingMode::oracle_gated:
            refine = !(initial.answer && answers_equal(*initial.answer, *q.gold));
            break;
    }

    if (!refine) {
        out.final_raw = initial.raw;
        out.record.predicted = initial.answer;
    } else {
        out.record.refined = true;
        try {
            auto [optimized, trace] = refine_prompt(q, p0, params, roles, opts,
                                                    &out.record.calls, &out.record.tokens);
            if (opts.final_answer == FinalAnswerMode::last_partial &&
                trace.terminated_by == TerminationReason::eos && !trace.steps.empty()) {
                trace.final_answer_source = FinalAnswerSource::last_partial;
                out.final_raw = trace.steps.back().partial_output;
            } else {
                trace.final_answer_source = FinalAnswerSource::fresh_generation;
                const AnswerOnce final_answer = answer_once(q, optimized, params, roles, opts,
                                                            &out.record.calls, &out.record.tokens);
                out.final_raw = final_answer.raw;
            }
            out.record.iterations = static_cast<int>(trace.steps.size());
            out.record.predicted = extract_answer(q.task, out.final_raw);
            out.trace = std::move(trace);
        } catch (const AbortedRunError& ex) {
            // Fail open: keep the initial answer, flag the record.
            out.record.fail_open = true;
            out.record.iterations = static_cast<int>(ex.partial_trace.steps.size());
            if (!ex.partial_trace.steps.empty()) out.trace = ex.partial_trace;
            out.final_raw = initial.raw;
            out.record.predicted = initial.answer;
        } catch (const BackendUnavailableError&) {
            out.record.fail_open = true;
            out.final_raw = initial.raw;
            out.record.predicted = initial.answer;
        }
    }

    out.record.correct =
        q.gold && out.record.predicted && answers_equal(*out.record.predicted, *q.gold);
    return out;
}

}  // namespace promptloop
