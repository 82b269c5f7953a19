#include "promptloop/report.hpp"

#include <cstdio>
#include <sstream>

namespace promptloop {

using nlohmann::json;

Report build_report(const std::vector<Method>& order,
                    const std::map<Method, std::vector<EvalRecord>>& records) {
    Report report;
    for (Method m : order) {
        auto it = records.find(m);
        if (it == records.end()) continue;
        report.summaries.push_back(summarize(m, it->second));
    }
    for (std::size_t i = 0; i < report.summaries.size(); ++i) {
        for (std::size_t j = i + 1; j < report.summaries.size(); ++j) {
            MethodComparison cmp;
            cmp.a = report.summaries[i].method;
            cmp.b = report.summaries[j].method;
            cmp.p_value =
                compare_methods(records.at(cmp.a), records.at(cmp.b), &cmp.pairs);
            report.comparisons.push_back(cmp);
        }
    }
    return report;
}

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

}  // namespace

std::string render_report_text(const RunConfig& config, std::size_t n_queries,
                               const Report& report) {
    std::ostringstream out;
    out << "dataset: " << to_string(config.dataset) << "  split: " << to_string(config.split)
        << "  queries: " << n_queries << "\n";
    out << "params: k=" << config.params.tokens_per_step << " n=" << config.params.max_steps
        << " mode=" << to_string(config.params.mode)
        << " temperature=" << fmt("%g", config.params.temperature) << " seed="
        << (config.params.seed ? std::to_string(*config.params.seed) : std::string("none"))
        << "\n";
    out << "task model: " << config.endpoint(RoleTag::task).model
        << "  feedback/optimizer model: " << config.endpoint(RoleTag::feedback).model << "\n";
    out << "scoring: " << (config.scoring == ScoringMode::judge ? "judge" : "deterministic")
        << "  generation: "
        << (config.generation == GenerationMode::continuation ? "continuation" : "fresh")
        << "  final_answer: "
        << (config.final_answer == FinalAnswerMode::last_partial ? "last_partial" : "regenerate")
        << "\n\n";

    out << "method                         n  accuracy [95% CI]      iters(refined)  iters(all)  "
           "refined\n";
    for (const auto& s : report.summaries) {
        char line[256];
        AccuracyCi ci{s.accuracy, s.ci_low, s.ci_high};
        std::snprintf(line, sizeof(line), "%-28s %4lld  %-21s %14.2f  %10.2f  %7lld\n",
                      to_string(s.method), static_cast<long long>(s.n),
                      format_accuracy(ci).c_str(), s.mean_iterations_refined,
                      s.mean_iterations_all, static_cast<long long>(s.refined));
        out << line;
    }
    out << "\ncalls per query (task/feedback/optimizer/verifier/judge):\n";
    for (const auto& s : report.summaries) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-28s %.2f / %.2f / %.2f / %.2f / %.2f\n",
                      to_string(s.method), s.mean_calls.task, s.mean_calls.feedback,
                      s.mean_calls.optimizer, s.mean_calls.verifier, s.mean_calls.judge);
        out << line;
    }
    out << "\ntokens per query (task/feedback/optimizer/verifier/judge):\n";
    for (const auto& s : report.summaries) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-28s %.1f / %.1f / %.1f / %.1f / %.1f\n",
                      to_string(s.method), s.mean_tokens.task, s.mean_tokens.feedback,
                      s.mean_tokens.optimizer, s.mean_tokens.verifier, s.mean_tokens.judge);
        out << line;
    }
    if (!report.comparisons.empty()) {
        out << "\ncomparisons (exact McNemar, two-sided):\n";
        for (const auto& c : report.comparisons) {
            char line[256];
            std::snprintf(line, sizeof(line),
                          "%s vs %s: p=%.6g (discordant %lld/%lld)\n", to_string(c.a),
                          to_string(c.b), c.p_value, static_cast<long long>(c.pairs.a_only),
                          static_cast<long long>(c.pairs.b_only));
            out << line;
        }
    }
    if (report.judge_errors > 0) {
        out << "\njudge errors (queries excluded from judge scoring): " << report.judge_errors
            << "\n";
    }
    if (report.failed_queries > 0) {
        out << "\nfailed queries (no record produced): " << report.failed_queries << "\n";
    }
    return out.str();
}

namespace {

json summary_json(const MethodSummary& s) {
    return {{"method", to_string(s.method)},
            {"n", s.n},
            {"correct", s.correct},
            {"accuracy", s.accuracy},
            {"ci_low", s.ci_low},
            {"ci_high", s.ci_high},
            {"mean_iterations_refined", s.mean_iterations_refined},
            {"mean_iterations_all", s.mean_iterations_all},
            {"refined", s.refined},
            {"fail_open", s.fail_open},
            {"mean_calls",
             {{"task", s.mean_calls.task},
              {"feedback", s.mean_calls.feedback},
              {"optimizer", s.mean_calls.optimizer},
              {"verifier", s.mean_calls.verifier},
              {"judge", s.mean_calls.judge}}},
            {"mean_tokens",
             {{"task", s.mean_tokens.task},
              {"feedback", s.mean_tokens.feedback},
              {"optimizer", s.mean_tokens.optimizer},
              {"verifier", s.mean_tokens.verifier},
              {"judge", s.mean_tokens.judge}}}};
}

}  // namespace

json render_report_json(const RunConfig& config, std::size_t n_queries, const Report& report) {
    json doc;
    doc["schema"] = "promptloop/report/v1";
    doc["dataset"] = to_string(config.dataset);
    doc["split"] = to_string(config.split);
    doc["queries"] = n_queries;
    doc["params"] = {{"tokens_per_step", config.params.tokens_per_step},
                     {"max_steps", config.params.max_steps},
                     {"mode", to_string(config.params.mode)},
                     {"temperature", config.params.temperature},
                     {"seed", config.params.seed ? json(*config.params.seed) : json(nullptr)}};
    doc["task_model"] = config.endpoint(RoleTag::task).model;
    json methods = json::array();
    for (const auto& s : report.summaries) methods.push_back(summary_json(s));
    doc["methods"] = std::move(methods);
    json comparisons = json::array();
    for (const auto& c : report.comparisons) {
        comparisons.push_back({{"a", to_string(c.a)},
                               {"b", to_string(c.b)},
                               {"p_value", c.p_value},
                               {"a_only", c.pairs.a_only},
                               {"b_only", c.pairs.b_only}});
    }
    doc["comparisons"] = std::move(comparisons);
    doc["judge_errors"] = report.judge_errors;
    doc["failed_queries"] = report.failed_queries;
    return doc;
}

}  // namespace promptloop
