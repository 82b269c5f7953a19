#include "promptloop/metrics.hpp"

#include "promptloop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace promptloop {

AccuracyCi accuracy_ci(std::int64_t correct, std::int64_t n) {
    if (n <= 0) throw DomainError("accuracy_ci needs n >= 1");
    if (correct < 0 || correct > n) throw DomainError("accuracy_ci needs 0 <= correct <= n");
    AccuracyCi out;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    const double half =
        1.96 * std::sqrt(out.accuracy * (1.0 - out.accuracy) / static_cast<double>(n));
    out.ci_low = std::max(0.0, out.accuracy - half);
    out.ci_high = std::min(1.0, out.accuracy + half);
    return out;
}

double round3(double x) {
    return std::floor(x * 1000.0 + 0.5) / 1000.0;
}

std::string format_accuracy(const AccuracyCi& ci) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f [%.3f, %.3f]", round3(ci.accuracy), round3(ci.ci_low),
                  round3(ci.ci_high));
    return buf;
}

double mcnemar_exact_p(std::int64_t b_count, std::int64_t c_count) {
    const std::int64_t n = b_count + c_count;
    if (n == 0) return 1.0;
    const std::int64_t k = std::min(b_count, c_count);
    // P(X <= k) for X ~ Binomial(n, 1/2), accumulated in log space.
    double log_term = -static_cast<double>(n) * std::log(2.0);  // log C(n,0) / 2^n
    double log_sum = log_term;
    for (std::int64_t i = 0; i < k; ++i) {
        log_term += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(i + 1));
        log_sum = std::max(log_sum, log_term) +
                  std::log1p(std::exp(std::min(log_sum, log_term) - std::max(log_sum, log_term)));
    }
    const double tail = std::exp(log_sum);
    return std::min(1.0, 2.0 * tail);
}

double compare_methods(const std::vector<EvalRecord>& a, const std::vector<EvalRecord>& b,
                       DiscordantPairs* pairs) {
    std::map<std::string, bool> a_correct;
    for (const auto& r : a) {
        if (!a_correct.emplace(r.query_id, r.correct).second) {
            throw ComparisonError("duplicate query id in first record set: " + r.query_id);
        }
    }
    if (b.size() != a.size()) {
        throw ComparisonError("record sets cover different query counts");
    }
    DiscordantPairs d;
    for (const auto& r : b) {
        auto it = a_correct.find(r.query_id);
        if (it == a_correct.end()) {
            throw ComparisonError("query id missing from first record set: " + r.query_id);
        }
        if (it->second && !r.correct) ++d.a_only;
        if (!it->second && r.correct) ++d.b_only;
    }
    if (pairs) *pairs = d;
    return mcnemar_exact_p(d.a_only, d.b_only);
}

IterationStats iteration_stats(const std::vector<RefinementTrace>& traces,
                               const std::vector<EvalRecord>& records) {
    std::map<std::string, const EvalRecord*> by_id;
    for (const auto& r : records) by_id[r.query_id] = &r;
    for (const auto& t : traces) {
        if (!by_id.count(t.query_id)) {
            throw ComparisonError("trace without a matching record: " + t.query_id);
        }
    }
    IterationStats out;
    out.total = static_cast<std::int64_t>(records.size());
    std::int64_t iter_sum = 0;
    for (const auto& r : records) {
        if (r.refined) {
            ++out.refined;
            iter_sum += r.iterations;
        }
    }
    out.mean_refined =
        out.refined ? static_cast<double>(iter_sum) / static_cast<double>(out.refined) : 0.0;
    out.mean_all =
        out.total ? static_cast<double>(iter_sum) / static_cast<double>(out.total) : 0.0;
    return out;
}

MethodSummary summarize(Method method, const std::vector<EvalRecord>& records) {
    MethodSummary s;
    s.method = method;
    s.n = static_cast<std::int64_t>(records.size());
    RoleCounts call_sum, token_sum;
    std::int64_t iter_sum = 0;
    for (const auto& r : records) {
        if (r.correct) ++s.correct;
        if (r.refined) {
            ++s.refined;
            iter_sum += r.iterations;
        }
        if (r.fail_open) ++s.fail_open;
        call_sum += r.calls;
        token_sum += r.tokens;
    }
    if (s.n > 0) {
        const AccuracyCi ci = accuracy_ci(s.correct, s.n);
        s.accuracy = ci.accuracy;
        s.ci_low = ci.ci_low;
        s.ci_high = ci.ci_high;
        const double dn = static_cast<double>(s.n);
        s.mean_calls = {static_cast<double>(call_sum.task) / dn,
                        static_cast<double>(call_sum.feedback) / dn,
                        static_cast<double>(call_sum.optimizer) / dn,
                        static_cast<double>(call_sum.verifier) / dn,
                        static_cast<double>(call_sum.judge) / dn};
        s.mean_tokens = {static_cast<double>(token_sum.task) / dn,
                         static_cast<double>(token_sum.feedback) / dn,
                         static_cast<double>(token_sum.optimizer) / dn,
                         static_cast<double>(token_sum.verifier) / dn,
                         static_cast<double>(token_sum.judge) / dn};
        s.mean_iterations_all = static_cast<double>(iter_sum) / dn;
    }
    s.mean_iterations_refined =
        s.refined ? static_cast<double>(iter_sum) / static_cast<double>(s.refined) : 0.0;
    return s;
}

bool llm_judge_correct(const Query& q, const std::string& raw_output, ChatBackend& judge_backend,
                       const std::string& judge_model, const TemplateSet& templates,
                       RoleCounts* calls, RoleCounts* tokens) {
    if (!q.gold) throw JudgeError("judge scoring needs a gold answer for query " + q.id);
    const RoleTemplate& tmpl = templates.role(RoleTag::judge);
    ChatRequest req;
    req.role_tag = RoleTag::judge;
    req.model_id = judge_model;
    if (!tmpl.system_text.empty()) {
        req.messages.push_back({Speaker::system, tmpl.system_text});
    }
    req.messages.push_back({Speaker::user, render(tmpl, {{"query", q.text},
                                                         {"output", raw_output},
                                                         {"gold", q.gold->render()}})});
    const Completion c = judge_backend.complete(req);
    if (calls) ++calls->judge;
    if (tokens) tokens->judge += c.prompt_tokens + c.completion_tokens;
    const Verdict v = parse_verdict(c.text);
    if (v.value == Verdict::Value::unparseable) {
        throw JudgeError("judge output has no verdict token for query " + q.id);
    }
    return v.value == Verdict::Value::correct;
}

}  // namespace promptloop
