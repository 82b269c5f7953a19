#pragma once

#include "promptloop/backend.hpp"
#include "promptloop/roles.hpp"
#include "promptloop/types.hpp"

#include <string>
#include <vector>

namespace promptloop {

struct AccuracyCi {
    double accuracy = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Normal-approximation (Wald) 95% interval: acc +/- 1.96*sqrt(acc*(1-acc)/n),
/// clamped to [0, 1]. Throws DomainError when n = 0.
AccuracyCi accuracy_ci(std::int64_t correct, std::int64_t n);

/// Rounds half-up to three decimals (the table-printing convention).
double round3(double x);

/// "0.480 [0.382, 0.578]" -- accuracy and CI at three decimals.
std::string format_accuracy(const AccuracyCi& ci);

struct DiscordantPairs {
    std::int64_t a_only = 0;  // a correct where b is not
    std::int64_t b_only = 0;  // b correct where a is not
};

/// Paired exact McNemar test over per-query binary outcomes. Records must
/// cover the same query ids. Returns the two-sided p-value.
double compare_methods(const std::vector<EvalRecord>& a, const std::vector<EvalRecord>& b,
                       DiscordantPairs* pairs = nullptr);

/// Exact two-sided binomial tail for a discordant-pair table.
double mcnemar_exact_p(std::int64_t b_count, std::int64_t c_count);

struct IterationStats {
    double mean_refined = 0.0;  // over refined queries only (0 when none)
    double mean_all = 0.0;      // over all queries, unrefined counting as 0
    std::int64_t refined = 0;
    std::int64_t total = 0;
};

/// Mean refinement iterations. Traces, when given, must be joinable to the
/// records by query_id.
IterationStats iteration_stats(const std::vector<RefinementTrace>& traces,
                               const std::vector<EvalRecord>& records);

struct RoleMeans {
    double task = 0, feedback = 0, optimizer = 0, verifier = 0, judge = 0;
};

/// Per-method aggregate: the Table-style row.
struct MethodSummary {
    Method method = Method::cot_baseline;
    std::int64_t n = 0;
    std::int64_t correct = 0;
    double accuracy = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_iterations_refined = 0.0;
    double mean_iterations_all = 0.0;
    std::int64_t refined = 0;
    std::int64_t fail_open = 0;
    RoleMeans mean_calls;
    RoleMeans mean_tokens;
};

MethodSummary summarize(Method method, const std::vector<EvalRecord>& records);

/// Optional LLM-judged scoring. Renders the judge template with the query,
/// the raw model output, and the gold answer; parses a binary verdict.
/// Throws JudgeError when the judge output has no verdict token.
bool llm_judge_correct(const Query& q, const std::string& raw_output, ChatBackend& judge_backend,
                       const std::string& judge_model, const TemplateSet& templates,
                       RoleCounts* calls = nullptr, RoleCounts* tokens = nullptr);

}  // namespace promptloop
